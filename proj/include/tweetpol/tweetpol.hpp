#pragma once

#include "tweetpol/cnn.hpp"
#include "tweetpol/corpus_io.hpp"
#include "tweetpol/embeddings.hpp"
#include "tweetpol/ensemble.hpp"
#include "tweetpol/features.hpp"
#include "tweetpol/lexicon.hpp"
#include "tweetpol/matrix.hpp"
#include "tweetpol/pipeline.hpp"
#include "tweetpol/polarity.hpp"
#include "tweetpol/preprocess.hpp"
#include "tweetpol/svm.hpp"
#include "tweetpol/synthetic.hpp"
#include "tweetpol/utf8.hpp"
