import sys

from grafl.main import main

sys.exit(main())
