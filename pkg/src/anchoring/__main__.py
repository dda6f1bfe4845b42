import sys

from anchoring.cli import main

sys.exit(main())
