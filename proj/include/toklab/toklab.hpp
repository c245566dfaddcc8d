#pragma once

// Umbrella header.

#include "toklab/align.hpp"
#include "toklab/bpe.hpp"
#include "toklab/conllu.hpp"
#include "toklab/errors.hpp"
#include "toklab/experiment.hpp"
#include "toklab/metrics.hpp"
#include "toklab/obpe.hpp"
#include "toklab/rng.hpp"
#include "toklab/tagger.hpp"
#include "toklab/text.hpp"
#include "toklab/tokenize.hpp"
#include "toklab/unigram.hpp"
#include "toklab/vocab.hpp"
