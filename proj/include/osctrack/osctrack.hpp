#ifndef OSCTRACK__OSCTRACK_HPP_
#define OSCTRACK__OSCTRACK_HPP_

#include "osctrack/errors.hpp"
#include "osctrack/systems.hpp"
#include "osctrack/controller.hpp"
#include "osctrack/expression.hpp"
#include "osctrack/curves.hpp"
#include "osctrack/integrator.hpp"
#include "osctrack/metrics.hpp"
#include "osctrack/certify.hpp"
#include "osctrack/scenarios.hpp"
#include "osctrack/io.hpp"
#include "osctrack/app.hpp"

#endif  // OSCTRACK__OSCTRACK_HPP_
