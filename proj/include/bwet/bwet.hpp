#pragma once

#include "bwet/error.hpp"
#include "bwet/numerics/adam.hpp"
#include "bwet/numerics/archive.hpp"
#include "bwet/numerics/autodiff.hpp"
#include "bwet/numerics/grad_check.hpp"
#include "bwet/numerics/ops.hpp"
#include "bwet/numerics/tensor.hpp"
#include "bwet/embeddings/provider.hpp"
#include "bwet/embeddings/tokenize.hpp"
#include "bwet/embeddings/vocab.hpp"
#include "bwet/techword/idcnn.hpp"
#include "bwet/encoder/attention.hpp"
#include "bwet/encoder/encoder.hpp"
#include "bwet/encoder/positional.hpp"
#include "bwet/crf/crf.hpp"
#include "bwet/crf/tag_vocab.hpp"
#include "bwet/corpus/bio.hpp"
#include "bwet/corpus/conll.hpp"
#include "bwet/corpus/metrics.hpp"
#include "bwet/corpus/sentence.hpp"
#include "bwet/corpus/split.hpp"
#include "bwet/corpus/synthetic.hpp"
#include "bwet/pipeline/config.hpp"
#include "bwet/pipeline/experiments.hpp"
#include "bwet/pipeline/model.hpp"
#include "bwet/pipeline/trainer.hpp"
