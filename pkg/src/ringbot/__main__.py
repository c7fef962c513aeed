import sys

from ringbot.cli import main

sys.exit(main())
