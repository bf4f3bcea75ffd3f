import sys

from mtsnn.cli import main

sys.exit(main())
