import sys

from crel.cli.main import main

sys.exit(main())
