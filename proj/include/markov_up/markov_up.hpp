#pragma once

// Umbrella header.

#include "markov_up/bounds.hpp"
#include "markov_up/certificate.hpp"
#include "markov_up/config.hpp"
#include "markov_up/error.hpp"
#include "markov_up/model.hpp"
#include "markov_up/monte_carlo.hpp"
#include "markov_up/path_analysis.hpp"
#include "markov_up/process.hpp"
#include "markov_up/random.hpp"
#include "markov_up/report.hpp"
