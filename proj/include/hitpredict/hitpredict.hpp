#pragma once

// Everything except the network transport (hitpredict/ingest/httplib_transport.hpp).

#include "hitpredict/csv.hpp"
#include "hitpredict/error.hpp"
#include "hitpredict/evaluation.hpp"
#include "hitpredict/ingest/http.hpp"
#include "hitpredict/ingest/spotify_client.hpp"
#include "hitpredict/learners/boosting.hpp"
#include "hitpredict/learners/config.hpp"
#include "hitpredict/learners/forest.hpp"
#include "hitpredict/learners/grid_search.hpp"
#include "hitpredict/learners/importance.hpp"
#include "hitpredict/learners/logistic.hpp"
#include "hitpredict/learners/mlp.hpp"
#include "hitpredict/learners/model.hpp"
#include "hitpredict/learners/model_io.hpp"
#include "hitpredict/matrix.hpp"
#include "hitpredict/metrics.hpp"
#include "hitpredict/pipeline/commands.hpp"
#include "hitpredict/pipeline/synth.hpp"
#include "hitpredict/random.hpp"
#include "hitpredict/records_io.hpp"
#include "hitpredict/split.hpp"
#include "hitpredict/standardize.hpp"
#include "hitpredict/track.hpp"
