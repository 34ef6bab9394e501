import sys

from halfcav.cli import main

sys.exit(main())
