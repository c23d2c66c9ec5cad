#pragma once

#include "propl/codec.hpp"
#include "propl/dataset.hpp"
#include "propl/error.hpp"
#include "propl/fps.hpp"
#include "propl/harness.hpp"
#include "propl/kernel.hpp"
#include "propl/lean.hpp"
#include "propl/oracle.hpp"
#include "propl/parallel.hpp"
#include "propl/proposition.hpp"
#include "propl/rng.hpp"
#include "propl/trace.hpp"
