#pragma once

#include "cwrgeom/embedding_store.hpp"
#include "cwrgeom/geometry_metrics.hpp"
#include "cwrgeom/isotropy_transform.hpp"

namespace cwrgeom {

// JSON documents with a stable key order. Every parameter that affects the
// numbers is echoed so a report can be regenerated from its own contents.

Json to_json(const IsotropyPc& pc);
Json to_json(const IsotropyReport& r);
Json to_json(const OutlierReport& r);
Json describe(const EmbeddingMatrix& m);
/// Header fields and provenance of a transform, without the numeric blocks.
Json describe(const IsotropyTransform& t);

}  // namespace cwrgeom
