import sys

from krnav.cli import main

sys.exit(main())
