import sys

from ble_energy_model import main

if __name__ == "__main__":
    sys.exit(main())
