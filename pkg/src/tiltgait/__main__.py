import sys

from tiltgait.cli import main

sys.exit(main())
