import sys

from congroute.main import main

sys.exit(main())
