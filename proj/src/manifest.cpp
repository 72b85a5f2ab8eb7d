// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "qpat/manifest.hpp"

#include <fstream>
#include <iterator>

#include "qpat/error.hpp"
#include "qpat/paqg.hpp"

namespace qpat::manifest {

namespace {

fs::path resolve(const fs::path& base, const std::string& relative)
{
    const fs::path p(relative);
    return p.is_absolute() ? p : base / p;
}

std::string relative_to(const fs::path& target, const fs::path& dir)
{
    return fs::relative(fs::absolute(target), fs::absolute(dir)).generic_string();
}

template <class T>
T get(const Json& value, const char* key, const std::string& context)
{
    if (!value.contains(key)) {
        throw Error(ErrorCode::InvalidArgument, context + ": missing key '" + key + "'");
    }
    try {
        return value.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::InvalidArgument, context + ": key '" + key + "' has the wrong type");
    }
}

Profile read_profile(const Json& value, std::size_t expected, const fs::path& base)
{
    Profile profile;
    if (value.is_number()) {
        profile.assign(expected, value.get<double>());
    } else if (value.is_array()) {
        profile = value.get<Profile>();
    } else if (value.is_string()) {
        const Json stored = read_json(resolve(base, value.get<std::string>()));
        if (!stored.is_array()) {
            throw Error(ErrorCode::InvalidArgument, "profile file must hold a JSON array");
        }
        profile = stored.get<Profile>();
    } else {
        throw Error(ErrorCode::InvalidArgument, "profile must be a number, an array or a path");
    }
    return profile;
}

std::vector<ScalarField> read_fields(const Json& value, const char* key, const fs::path& base)
{
    std::vector<ScalarField> fields;
    if (!value.contains(key)) {
        return fields;
    }
    for (const auto& entry : value.at(key)) {
        fields.push_back(read_grid(resolve(base, entry.get<std::string>())));
    }
    return fields;
}

Json write_fields(const fs::path& dir, const std::vector<ScalarField>& fields, const std::string& stem)
{
    Json names = Json::array();
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string name = stem + "_" + std::to_string(i + 1) + ".paqg";
        write_grid(dir / name, fields[i]);
        names.push_back(name);
    }
    return names;
}

Json coefficients_json(const Coefficients& c)
{
    Json out;
    out["gamma"] = c.gamma;
    out["mu_a"] = c.mu_a;
    out["mu_s"] = c.mu_s;
    return out;
}

Json range_json(const Range& r)
{
    return Json::array({r.lo, r.hi});
}

}  // namespace

Json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) {
        throw Error(ErrorCode::InvalidArgument, path.string() + " is not valid JSON");
    }
    return value;
}

void write_json(const fs::path& path, const Json& value)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    }
    out << value.dump(2) << '\n';
    if (!out) {
        throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
}

void reject_unknown_keys(const Json& value, std::initializer_list<const char*> allowed,
                         const std::string& context)
{
    if (!value.is_object()) {
        throw Error(ErrorCode::InvalidArgument, context + " must be a JSON object");
    }
    for (const auto& item : value.items()) {
        bool known = false;
        for (const char* key : allowed) {
            known = known || item.key() == key;
        }
        if (!known) {
            throw Error(ErrorCode::InvalidArgument,
                        context + ": unknown key '" + item.key() + "'");
        }
    }
}

Json beam_to_json(const Beam& beam)
{
    Json out;
    out["axis"] = beam.axis;
    out["sign"] = beam.sign;
    out["profile"] = beam.profile;
    return out;
}

Beam beam_from_json(const Json& value, const GridGeometry& geometry, const fs::path& base)
{
    reject_unknown_keys(value, {"axis", "sign", "direction", "profile"}, "beam");
    Beam beam;
    if (value.contains("direction")) {
        const auto direction = get<std::vector<double>>(value, "direction", "beam");
        beam = beam_from_direction(direction, {});
    } else {
        beam.axis = get<std::size_t>(value, "axis", "beam");
        beam.sign = get<int>(value, "sign", "beam");
    }
    if (beam.axis >= geometry.rank()) {
        throw Error(ErrorCode::UnsupportedDirection, "beam axis out of range for the grid");
    }
    const std::size_t expected = geometry.line_count(beam.axis);
    beam.profile = value.contains("profile") ? read_profile(value.at("profile"), expected, base)
                                             : Profile(expected, 1.0);
    validate_beam(beam, geometry);
    return beam;
}

Json illumination_to_json(const BoundaryIllumination& light)
{
    Json out;
    out["scale"] = light.scale;
    out["rate"] = light.rate;
    out["direction"] = light.direction;
    out["centre"] = light.centre;
    return out;
}

BoundaryIllumination illumination_from_json(const Json& value)
{
    reject_unknown_keys(value, {"scale", "rate", "direction", "centre"}, "illumination");
    BoundaryIllumination light;
    if (value.contains("scale")) light.scale = get<double>(value, "scale", "illumination");
    if (value.contains("rate")) light.rate = get<double>(value, "rate", "illumination");
    if (value.contains("direction")) {
        light.direction = get<std::array<double, 2>>(value, "direction", "illumination");
    }
    if (value.contains("centre")) {
        light.centre = get<std::array<double, 2>>(value, "centre", "illumination");
    }
    if (!(light.scale >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "illumination scale must be >= 0");
    }
    return light;
}

Json phantom_spec_to_json(const PhantomSpec& spec)
{
    Json out;
    out["kind"] = std::string(to_string(spec.kind));
    out["dims"] = std::vector<std::size_t>(spec.geometry.dims().begin(), spec.geometry.dims().end());
    out["spacing"] = std::vector<double>(spec.geometry.spacing().begin(), spec.geometry.spacing().end());
    out["origin"] = std::vector<double>(spec.geometry.origin().begin(), spec.geometry.origin().end());
    out["inside"] = coefficients_json(spec.inside);
    out["background"] = coefficients_json(spec.background);
    switch (spec.kind) {
    case PhantomKind::Uniform:
        break;
    case PhantomKind::Slab:
        out["slab"] = {{"axis", spec.slab_axis}, {"lo", spec.slab_lo}, {"hi", spec.slab_hi}};
        break;
    case PhantomKind::Checker:
        out["checker_cells"] = spec.checker_cells;
        break;
    case PhantomKind::GaussianBlobs:
        out["blobs"] = {{"count", spec.blob_count},
                        {"seed", spec.seed},
                        {"gamma", range_json(spec.blob_gamma)},
                        {"mu_a", range_json(spec.blob_mu_a)},
                        {"mu_s", range_json(spec.blob_mu_s)},
                        {"width", range_json(spec.blob_width)},
                        {"margin", spec.blob_margin}};
        break;
    }
    return out;
}

void write_phantom(const fs::path& dir, const Phantom& phantom, const PhantomSpec& spec)
{
    fs::create_directories(dir);
    write_grid(dir / "gamma.paqg", phantom.gamma());
    write_grid(dir / "mu_a.paqg", phantom.mu_a());
    write_grid(dir / "mu_s.paqg", phantom.mu_s());
    Json out;
    out["kind"] = "phantom";
    out["spec"] = phantom_spec_to_json(spec);
    out["fields"] = {{"gamma", "gamma.paqg"}, {"mu_a", "mu_a.paqg"}, {"mu_s", "mu_s.paqg"}};
    write_json(dir / "manifest.json", out);
}

Phantom read_phantom(const fs::path& manifest_path)
{
    const Json value = read_json(manifest_path);
    if (!value.contains("kind") || value["kind"] != "phantom" || !value.contains("fields")) {
        throw Error(ErrorCode::InvalidArgument, manifest_path.string() + " is not a phantom manifest");
    }
    const fs::path base = manifest_path.parent_path();
    const Json& fields = value["fields"];
    return Phantom(read_grid(resolve(base, get<std::string>(fields, "gamma", "phantom"))),
                   read_grid(resolve(base, get<std::string>(fields, "mu_a", "phantom"))),
                   read_grid(resolve(base, get<std::string>(fields, "mu_s", "phantom"))));
}

fs::path write_dataset(const fs::path& dir, const Dataset& dataset, const Json& extra)
{
    fs::create_directories(dir);
    Json out;
    out["kind"] = "dataset";
    if (const auto* ss = std::get_if<SingleScatterDataset>(&dataset)) {
        validate(ss->data);
        out["model"] = "single-scatter";
        if (ss->phantom) {
            out["phantom"] = relative_to(*ss->phantom, dir);
        }
        out["beams"] = Json::array();
        for (const auto& beam : ss->data.beams) {
            out["beams"].push_back(beam_to_json(beam));
        }
        out["pressures"] = write_fields(dir, ss->data.pressures, "pressure");
        if (!ss->fluences.empty()) {
            out["fluences"] = write_fields(dir, ss->fluences, "fluence");
        }
        if (ss->data.transmissions) {
            out["transmissions"] = Json::array();
            for (std::size_t i = 0; i < ss->data.transmissions->size(); ++i) {
                const std::string name = "transmission_" + std::to_string(i + 1) + ".json";
                write_json(dir / name, Json((*ss->data.transmissions)[i]));
                out["transmissions"].push_back(name);
            }
        }
    } else {
        const auto& df = std::get<DiffusionDataset>(dataset);
        out["model"] = "diffusion";
        if (df.phantom) {
            out["phantom"] = relative_to(*df.phantom, dir);
        }
        out["theta1"] = df.theta1;
        out["illuminations"] = Json::array();
        for (const auto& light : df.illuminations) {
            out["illuminations"].push_back(illumination_to_json(light));
        }
        out["pressures"] = write_fields(dir, df.pressures, "pressure");
        if (!df.fluences.empty()) {
            out["fluences"] = write_fields(dir, df.fluences, "fluence");
        }
        out["anchor"] = {{"index", {df.anchor.i, df.anchor.j}}, {"sigma_phi_sq", df.anchor_value}};
    }
    for (const auto& item : extra.items()) {
        out[item.key()] = item.value();
    }
    const fs::path path = dir / "dataset.json";
    write_json(path, out);
    return path;
}

Dataset read_dataset(const fs::path& manifest_path)
{
    const Json value = read_json(manifest_path);
    if (!value.contains("kind") || value["kind"] != "dataset") {
        throw Error(ErrorCode::InvalidArgument, manifest_path.string() + " is not a dataset manifest");
    }
    const fs::path base = manifest_path.parent_path();
    const auto model = get<std::string>(value, "model", "dataset");
    std::optional<fs::path> phantom;
    if (value.contains("phantom")) {
        phantom = resolve(base, value["phantom"].get<std::string>());
    }

    if (model == "single-scatter") {
        SingleScatterDataset ds;
        ds.phantom = phantom;
        ds.data.pressures = read_fields(value, "pressures", base);
        if (ds.data.pressures.empty()) {
            throw Error(ErrorCode::InvalidArgument, "dataset lists no pressures");
        }
        for (const auto& beam : value.at("beams")) {
            ds.data.beams.push_back(beam_from_json(beam, ds.data.geometry(), base));
        }
        ds.fluences = read_fields(value, "fluences", base);
        if (value.contains("transmissions")) {
            ds.data.transmissions.emplace();
            for (std::size_t i = 0; i < value["transmissions"].size(); ++i) {
                const Beam& beam = ds.data.beams.at(i);
                ds.data.transmissions->push_back(read_profile(
                    value["transmissions"][i], ds.data.geometry().line_count(beam.axis), base));
            }
        }
        validate(ds.data);
        return ds;
    }
    if (model == "diffusion") {
        DiffusionDataset ds;
        ds.phantom = phantom;
        ds.pressures = read_fields(value, "pressures", base);
        ds.fluences = read_fields(value, "fluences", base);
        if (value.contains("theta1")) {
            ds.theta1 = get<double>(value, "theta1", "dataset");
        }
        if (value.contains("illuminations")) {
            for (const auto& light : value["illuminations"]) {
                ds.illuminations.push_back(illumination_from_json(light));
            }
        }
        const Json& anchor = value.at("anchor");
        const auto index = get<std::vector<std::size_t>>(anchor, "index", "anchor");
        if (index.size() != 2) {
            throw Error(ErrorCode::InvalidArgument, "anchor index must have two entries");
        }
        ds.anchor = GridNode2D{index[0], index[1]};
        ds.anchor_value = get<double>(anchor, "sigma_phi_sq", "anchor");
        return ds;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown dataset model '" + model + "'");
}

}  // namespace qpat::manifest
