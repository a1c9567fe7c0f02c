import sys

from crsnomalab.reports.cli import main

if __name__ == '__main__':
    sys.exit(main())
