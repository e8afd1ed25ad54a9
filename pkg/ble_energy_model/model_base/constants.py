"""Protocol constants of Bluetooth Low Energy, SI units."""

from enum import Enum

# connected mode
T_C_MIN = 7.5e-3
T_C_MAX = 4.0
N_SL_MAX = 500
TRANSMIT_WINDOW_DELAY = 1.25e-3
TRANSMIT_WINDOW_MAX = 10e-3

# advertising and scanning
T_A_MIN = 20e-3
T_A_MAX = 10.24
T_S_MAX = 10.24
RHO_MAX = 10e-3
ADV_CHANNELS = (37, 38, 39)

# packet sizes in bytes
ADV_PACKET_BYTES = 37
CONNECT_REQUEST_BYTES = 44
CONNECTION_UPDATE_BYTES = 22
PACKET_OVERHEAD_BYTES = 17
MAX_PAYLOAD_BYTES = 20

BITS_PER_BYTE = 8


class Role(str, Enum):
    MASTER = 'master'
    SLAVE = 'slave'
