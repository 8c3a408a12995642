import sys

from secweb.cli import main

sys.exit(main())
