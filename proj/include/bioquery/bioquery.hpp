#pragma once

// Umbrella header. http_api.hpp is left out so the core does not pull in
// the HTTP library.

#include "cnl_parser.hpp"
#include "compiler.hpp"
#include "engine.hpp"
#include "error.hpp"
#include "explainer.hpp"
#include "fact_store.hpp"
#include "lexicon.hpp"
#include "program.hpp"
#include "rule_layer.hpp"
#include "service.hpp"
