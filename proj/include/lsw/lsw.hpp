#ifndef LSW_LSW_HPP
#define LSW_LSW_HPP

#include "lsw/error.hpp"
#include "lsw/ews.hpp"
#include "lsw/fft.hpp"
#include "lsw/harness.hpp"
#include "lsw/io.hpp"
#include "lsw/kde.hpp"
#include "lsw/lacv.hpp"
#include "lsw/models.hpp"
#include "lsw/rng.hpp"
#include "lsw/stationarity.hpp"
#include "lsw/svg.hpp"
#include "lsw/time_series.hpp"
#include "lsw/wavelet.hpp"

#endif  // LSW_LSW_HPP
