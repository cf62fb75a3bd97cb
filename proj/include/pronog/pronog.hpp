#pragma once

#include "pronog/checkpoint.hpp"
#include "pronog/contrastive.hpp"
#include "pronog/encoder.hpp"
#include "pronog/error.hpp"
#include "pronog/eval.hpp"
#include "pronog/fewshot.hpp"
#include "pronog/graph.hpp"
#include "pronog/graph_io.hpp"
#include "pronog/matrix.hpp"
#include "pronog/mlp.hpp"
#include "pronog/pretrain.hpp"
#include "pronog/prompt.hpp"
#include "pronog/rng.hpp"
#include "pronog/theorems.hpp"
