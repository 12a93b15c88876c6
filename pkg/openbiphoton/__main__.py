import sys

from openbiphoton.app import main

sys.exit(main())
