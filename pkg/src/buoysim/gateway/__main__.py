import sys

from buoysim.gateway.cli import main

sys.exit(main())
