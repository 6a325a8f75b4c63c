import sys

from tabledst.cli import main

sys.exit(main())
