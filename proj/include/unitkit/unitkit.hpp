#ifndef UNITKIT_UNITKIT_HPP
#define UNITKIT_UNITKIT_HPP

#include "unitkit/audio_io.hpp"
#include "unitkit/augment.hpp"
#include "unitkit/error.hpp"
#include "unitkit/features.hpp"
#include "unitkit/kmeans.hpp"
#include "unitkit/manifest.hpp"
#include "unitkit/metrics.hpp"
#include "unitkit/parallel.hpp"
#include "unitkit/pipeline.hpp"
#include "unitkit/pitch.hpp"
#include "unitkit/rng.hpp"
#include "unitkit/sampler.hpp"
#include "unitkit/segment.hpp"
#include "unitkit/targets.hpp"

#endif
