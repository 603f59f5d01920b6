#pragma once

// Umbrella header.

#include "fairaudit/domain.hpp"
#include "fairaudit/rate_table.hpp"
#include "fairaudit/notions.hpp"
#include "fairaudit/bounds.hpp"
#include "fairaudit/oracle.hpp"
#include "fairaudit/simulator.hpp"
#include "fairaudit/ingestion.hpp"
#include "fairaudit/report.hpp"
