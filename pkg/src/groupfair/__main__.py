import sys

from groupfair.cli import main

sys.exit(main())
