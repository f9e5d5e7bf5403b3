#pragma once

#include "wfmap/bench.hpp"
#include "wfmap/cluster.hpp"
#include "wfmap/dot.hpp"
#include "wfmap/generator.hpp"
#include "wfmap/hetmem.hpp"
#include "wfmap/hetpart.hpp"
#include "wfmap/json_io.hpp"
#include "wfmap/makespan.hpp"
#include "wfmap/mapping.hpp"
#include "wfmap/memory.hpp"
#include "wfmap/partitioner.hpp"
#include "wfmap/oracle.hpp"
#include "wfmap/quotient.hpp"
#include "wfmap/random_graphs.hpp"
#include "wfmap/workflow.hpp"
