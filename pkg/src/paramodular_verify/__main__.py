import sys

from paramodular_verify.main import main


sys.exit(main())
