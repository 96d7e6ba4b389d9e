import sys

from exactmip.cli import main

sys.exit(main())
