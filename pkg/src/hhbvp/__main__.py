import sys

from hhbvp.cli import main

sys.exit(main())
