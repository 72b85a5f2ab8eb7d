// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qpat/diffusion.hpp"
#include "qpat/path_integration.hpp"
#include "qpat/phantom.hpp"
#include "qpat/single_scatter.hpp"

// JSON manifests tying PAQG files into experiment directories. Every path
// stored in a manifest is relative to the manifest's own directory.
namespace qpat::manifest {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

Json read_json(const fs::path& path);
/// Pretty-printed with a trailing newline; output is byte-stable.
void write_json(const fs::path& path, const Json& value);

/// {"axis": k, "sign": +/-1, "profile": [...]}.
Json beam_to_json(const Beam& beam);
/// Accepts {"axis","sign"} or {"direction": [..]}, with "profile" given as a
/// number (uniform), an inline array, or a path to a JSON file holding an
/// array. Unknown keys are rejected.
Beam beam_from_json(const Json& value, const GridGeometry& geometry, const fs::path& base);

Json illumination_to_json(const BoundaryIllumination& light);
BoundaryIllumination illumination_from_json(const Json& value);

Json phantom_spec_to_json(const PhantomSpec& spec);

/// Writes gamma.paqg, mu_a.paqg, mu_s.paqg and manifest.json into `dir`.
void write_phantom(const fs::path& dir, const Phantom& phantom, const PhantomSpec& spec);
Phantom read_phantom(const fs::path& manifest_path);

struct SingleScatterDataset {
    IlluminationDataSet data;
    std::vector<ScalarField> fluences;  ///< may be empty
    std::optional<fs::path> phantom;    ///< absolute or manifest-relative source phantom
};

struct DiffusionDataset {
    std::vector<ScalarField> pressures;
    std::vector<ScalarField> fluences;
    std::vector<BoundaryIllumination> illuminations;
    GridNode2D anchor;
    double anchor_value = 0.0;  ///< sigma * phi_N^2 at the anchor
    double theta1 = 0.0;
    std::optional<fs::path> phantom;
};

using Dataset = std::variant<SingleScatterDataset, DiffusionDataset>;

/// Writes the PAQG/JSON payloads and dataset.json into `dir`; returns the
/// manifest path.
fs::path write_dataset(const fs::path& dir, const Dataset& dataset, const Json& extra = Json::object());
Dataset read_dataset(const fs::path& manifest_path);

/// Throws InvalidArgument naming the first key of `value` outside `allowed`.
void reject_unknown_keys(const Json& value, std::initializer_list<const char*> allowed,
                         const std::string& context);

}  // namespace qpat::manifest
