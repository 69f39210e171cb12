import sys

from ccprime.cli import main

sys.exit(main())
