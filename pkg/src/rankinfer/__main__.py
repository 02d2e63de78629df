import sys

from rankinfer.cli import main

sys.exit(main())
