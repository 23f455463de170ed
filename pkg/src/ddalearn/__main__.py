import sys

from ddalearn.cli import main

sys.exit(main())
