import sys

from dementia_detection.cli import main

sys.exit(main())
