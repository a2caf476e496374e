#pragma once

#include "simpeval/corpus.hpp"
#include "simpeval/delta.hpp"
#include "simpeval/entity_adequacy.hpp"
#include "simpeval/errors.hpp"
#include "simpeval/evaluation.hpp"
#include "simpeval/faithfulness.hpp"
#include "simpeval/human_eval.hpp"
#include "simpeval/prf.hpp"
#include "simpeval/report.hpp"
#include "simpeval/sampling.hpp"
#include "simpeval/score_matrix.hpp"
#include "simpeval/scorer_protocol.hpp"
#include "simpeval/simplicity.hpp"
#include "simpeval/stats.hpp"
#include "simpeval/surface_metrics.hpp"
#include "simpeval/textcore.hpp"
