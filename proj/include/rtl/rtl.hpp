#pragma once

#include "baselines/knn.hpp"
#include "baselines/model_io.hpp"
#include "baselines/naive_bayes.hpp"
#include "baselines/svm.hpp"
#include "baselines/truncated_lr.hpp"
#include "corpus.hpp"
#include "design.hpp"
#include "dtm.hpp"
#include "error.hpp"
#include "metrics.hpp"
#include "model_io.hpp"
#include "model_selection.hpp"
#include "penalty.hpp"
#include "porter.hpp"
#include "preprocess.hpp"
#include "solver.hpp"
#include "stopwords.hpp"
#include "theory_sim.hpp"
