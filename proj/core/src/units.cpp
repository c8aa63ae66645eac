#include "mclosure/units.hpp"

static_assert(mclosure::units::rad_per_fs_per_wavenumber > 1.88e-4 &&
              mclosure::units::rad_per_fs_per_wavenumber < 1.89e-4);
