#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "mrf/bundle.hpp"
#include "mrf/epg.hpp"
#include "mrf/inference.hpp"
#include "mrf/operator.hpp"
#include "mrf/phantom.hpp"
#include "mrf/sampling.hpp"
#include "mrf/subspace.hpp"

// Conversions between pipeline artifacts and array bundles. Arrays are stored
// in single precision; the `kind` field of the header names the artifact.

namespace mrf {

nlohmann::json schedule_to_json(const SequenceSchedule& schedule);
SequenceSchedule schedule_from_json(const nlohmann::json& j);

/// atoms complex64 (L, d), t1/t2 float32 (d).
Bundle dictionary_to_bundle(const Dictionary& dict, std::size_t k_max);
Dictionary dictionary_from_bundle(const Bundle& bundle);

/// v complex64 (L, S), singular_values float32.
Bundle basis_to_bundle(const SubspaceBasis& basis);
SubspaceBasis basis_from_bundle(const Bundle& bundle);

/// t1, t2, pd float32 (H, W), labels int32 (H, W).
Bundle ground_truth_to_bundle(const GroundTruth& gt);
GroundTruth ground_truth_from_bundle(const Bundle& bundle);

struct Acquisition {
  KSpaceData data;
  SamplingPattern pattern;
  CoilMaps coils;
  CoilKind coil_kind = CoilKind::gaussian_ring;
  double kspace_noise = 0.0;
};

/// kspace complex64 (L, C, H, W), masks uint8 (L, H, W), sens complex64 (C, H, W).
Bundle acquisition_to_bundle(const Acquisition& acq);
Acquisition acquisition_from_bundle(const Bundle& bundle);

/// x complex64 (S, H, W); extra header fields come from `meta`.
Bundle subspace_images_to_bundle(const CMatrix& x, ImageShape shape, nlohmann::json meta = {});
CMatrix subspace_images_from_bundle(const Bundle& bundle, ImageShape* shape);

/// t1, t2 float32 (H, W) and pd when present.
Bundle maps_to_bundle(const RVector& t1, const RVector& t2, const RVector& pd, ImageShape shape,
                      const std::string& method);

struct MapsArtifact {
  ImageShape shape;
  RVector t1, t2, pd;
  std::string method;
};
MapsArtifact maps_from_bundle(const Bundle& bundle);

/// w1..w3 float32 (out, in), b1..b3 float32 (out).
Bundle net_to_bundle(const MrfNet& net);
MrfNet net_from_bundle(const Bundle& bundle);

}  // namespace mrf
