import sys

from invex2d.main import main

sys.exit(main())
