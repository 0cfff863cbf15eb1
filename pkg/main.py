import sys
from toricbayes.cli.toricbayes import main

if __name__ == "__main__":
    sys.exit(main())
