import sys

from needlecast.cli import main

sys.exit(main())
