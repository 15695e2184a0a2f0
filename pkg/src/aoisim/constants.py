"""Physical constants shared across the simulator (km / s / bit units)."""

EARTH_RADIUS_KM = 6371.0

# Standard gravitational parameter of Earth, km^3/s^2.
MU_EARTH_KM3_S2 = 398600.4418

# Earth rotation rate, rad/s.
EARTH_ROTATION_RAD_S = 7.2921159e-5

SPEED_OF_LIGHT_KM_S = 299792.458

# Largest IP datagram, used as the default MTU for fire-mask packets.
DEFAULT_MTU_BYTES = 65535

DEFAULT_ISL_BANDWIDTH_BPS = 10e9
DEFAULT_SGL_BANDWIDTH_BPS = 100e6
