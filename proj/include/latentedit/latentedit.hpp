#pragma once

#include "latentedit/autoencoder.hpp"
#include "latentedit/baseline.hpp"
#include "latentedit/dataset.hpp"
#include "latentedit/editor.hpp"
#include "latentedit/eval.hpp"
#include "latentedit/gaussianize.hpp"
#include "latentedit/io.hpp"
#include "latentedit/mlp.hpp"
#include "latentedit/npy.hpp"
#include "latentedit/oracle.hpp"
#include "latentedit/pca.hpp"
#include "latentedit/protocol.hpp"
