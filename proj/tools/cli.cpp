// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qpat/diffusion.hpp"
#include "qpat/error.hpp"
#include "qpat/manifest.hpp"
#include "qpat/metrics.hpp"
#include "qpat/paqg.hpp"
#include "qpat/phantom.hpp"
#include "qpat/recon.hpp"
#include "qpat/rng.hpp"
#include "qpat/single_scatter.hpp"
#include "qpat/sphere_quadrature.hpp"

namespace qpat::cli {

namespace {

namespace fs = std::filesystem;
using manifest::Json;

int exit_code(ErrorCode code)
{
    switch (code) {
    case ErrorCode::Io:
    case ErrorCode::TransmissionRequired:
        return kMissingInput;
    case ErrorCode::EmptySupport:
        return kEmptySupport;
    case ErrorCode::DegenerateIlluminations:
        return kDegenerate;
    case ErrorCode::SolverFailure:
        return kInternal;
    default:
        return kValidation;
    }
}

std::string number(double v)
{
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

Json metrics_json(const MetricsReport& m)
{
    Json out;
    out["rel_l2"] = m.rel_l2;
    out["max_abs"] = m.max_abs;
    out["count"] = m.count;
    out["masked_rel_l2"] = m.masked_rel_l2;
    out["masked_max_abs"] = m.masked_max_abs;
    out["masked_count"] = m.masked_count;
    return out;
}

std::string relative_path(const fs::path& target, const fs::path& dir)
{
    return fs::relative(fs::absolute(target), fs::absolute(dir)).generic_string();
}

ScalarField product(const ScalarField& a, const ScalarField& b)
{
    std::vector<double> values(a.size());
    for (std::size_t n = 0; n < a.size(); ++n) {
        values[n] = a[n] * b[n];
    }
    return ScalarField(a.geometry(), std::move(values));
}

/// gamma mu_a / sqrt(sigma), the first diffusion-quotient combination.
ScalarField comb1_truth(const Phantom& phantom, double theta1)
{
    const ScalarField sigma = diffusion_coefficient(phantom, theta1);
    const ScalarField gm = phantom.gamma_mu_a();
    std::vector<double> values(gm.size());
    for (std::size_t n = 0; n < gm.size(); ++n) {
        values[n] = gm[n] / std::sqrt(sigma[n]);
    }
    return ScalarField(gm.geometry(), std::move(values));
}

// phantom ---------------------------------------------------------------------------

struct PhantomCommand {
    std::string kind = "uniform";
    std::size_t nx = 64;
    std::size_t ny = 64;
    std::size_t nz = 0;
    double length = 1.0;
    PhantomSpec spec;
    std::array<double, 2> blob_gamma{0.0, 0.0};
    std::array<double, 2> blob_mu_a{0.2, 0.5};
    std::array<double, 2> blob_mu_s{0.0, 0.3};
    std::array<double, 2> blob_width{0.05, 0.12};
    std::string out;
};

void add_phantom(CLI::App& app, PhantomCommand& c)
{
    auto* sub = app.add_subcommand("phantom", "Generate a phantom (gamma, mu_a, mu_s)");
    sub->add_option("--kind", c.kind, "uniform | gaussian-blobs | slab | checker")
        ->check(CLI::IsMember({"uniform", "gaussian-blobs", "slab", "checker"}))
        ->capture_default_str();
    sub->add_option("--nx", c.nx, "Nodes along x")->check(CLI::Range(2, 1 << 16))->capture_default_str();
    sub->add_option("--ny", c.ny, "Nodes along y")->check(CLI::Range(2, 1 << 16))->capture_default_str();
    sub->add_option("--nz", c.nz, "Nodes along z; 0 for a 2D grid")->check(CLI::Range(0, 1 << 16));
    sub->add_option("--length", c.length, "Side length of the grid")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--gamma", c.spec.inside.gamma, "Grueneisen parameter inside the object")
        ->check(CLI::PositiveNumber);
    sub->add_option("--mu-a", c.spec.inside.mu_a, "Absorption inside the object")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--mu-s", c.spec.inside.mu_s, "Scattering inside the object")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--bg-gamma", c.spec.background.gamma, "Background Grueneisen parameter")
        ->check(CLI::PositiveNumber);
    sub->add_option("--bg-mu-a", c.spec.background.mu_a, "Background absorption")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--bg-mu-s", c.spec.background.mu_s, "Background scattering")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", c.spec.seed, "Seed for gaussian-blobs")->capture_default_str();
    sub->add_option("--blobs", c.spec.blob_count, "Number of blobs")->capture_default_str();
    sub->add_option("--blob-gamma", c.blob_gamma, "Amplitude range added to gamma (lo hi)");
    sub->add_option("--blob-mu-a", c.blob_mu_a, "Amplitude range added to mu_a (lo hi)");
    sub->add_option("--blob-mu-s", c.blob_mu_s, "Amplitude range added to mu_s (lo hi)");
    sub->add_option("--blob-width", c.blob_width, "Width range as a fraction of the shortest side");
    sub->add_option("--blob-margin", c.spec.blob_margin, "Keep blob centres this fraction away from faces")
        ->check(CLI::Range(0.0, 0.5));
    sub->add_option("--slab-axis", c.spec.slab_axis, "Axis normal to the slab");
    sub->add_option("--slab-lo", c.spec.slab_lo, "Slab start as a fraction of the axis extent");
    sub->add_option("--slab-hi", c.spec.slab_hi, "Slab end as a fraction of the axis extent");
    sub->add_option("--checker-cells", c.spec.checker_cells, "Checker cells per axis")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "Output directory")->required();
}

int run_phantom(PhantomCommand& c, std::ostream& out)
{
    std::vector<std::size_t> dims{c.nx, c.ny};
    if (c.nz > 0) {
        if (c.nz < 2) {
            throw Error(ErrorCode::InvalidArgument, "--nz must be 0 or >= 2");
        }
        dims.push_back(c.nz);
    }
    c.spec.kind = parse_phantom_kind(c.kind);
    c.spec.geometry = GridGeometry::uniform(dims, c.length);
    c.spec.blob_gamma = {c.blob_gamma[0], c.blob_gamma[1]};
    c.spec.blob_mu_a = {c.blob_mu_a[0], c.blob_mu_a[1]};
    c.spec.blob_mu_s = {c.blob_mu_s[0], c.blob_mu_s[1]};
    c.spec.blob_width = {c.blob_width[0], c.blob_width[1]};
    const Phantom phantom = make_phantom(c.spec);
    manifest::write_phantom(c.out, phantom, c.spec);
    out << "wrote " << (fs::path(c.out) / "manifest.json").generic_string() << '\n';
    return kOk;
}

// forward ---------------------------------------------------------------------------

struct ForwardCommand {
    std::string model;
    std::string phantom;
    std::string beams;
    std::size_t axis = 0;
    double profile = 1.0;
    std::string illuminations;
    double theta1 = 0.0;
    double tolerance = 1e-10;
    std::vector<std::size_t> anchor;
    bool verify_pde = false;
    std::string out;
};

void add_forward(CLI::App& app, ForwardCommand& c)
{
    auto* sub = app.add_subcommand("forward", "Synthesize internal data from a phantom");
    sub->add_option("--model", c.model, "single-scatter | diffusion")
        ->check(CLI::IsMember({"single-scatter", "diffusion"}))
        ->required();
    sub->add_option("--phantom", c.phantom, "Phantom manifest.json")->required();
    sub->add_option("--beams", c.beams, "single-scatter: JSON file with two opposite beams");
    sub->add_option("--axis", c.axis, "single-scatter: beam axis when --beams is absent")->capture_default_str();
    sub->add_option("--profile", c.profile, "single-scatter: uniform initial fluence")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--illuminations", c.illuminations, "diffusion: JSON file with boundary illuminations");
    sub->add_option("--theta1", c.theta1, "diffusion: first moment of the phase function")
        ->check(CLI::Range(-3.0, 3.0))
        ->capture_default_str();
    sub->add_option("--tol", c.tolerance, "Solver and verification tolerance")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--anchor", c.anchor, "diffusion: anchor node i j (default: grid centre)")->expected(2);
    sub->add_flag("--verify-pde", c.verify_pde, "Check the discrete model residuals after synthesis");
    sub->add_option("--out", c.out, "Output directory")->required();
}

/// Three plane-wave illuminations whose quotient gradients span the plane.
std::vector<BoundaryIllumination> default_illuminations(const GridGeometry& g)
{
    const std::array<double, 2> centre{g.origin()[0] + 0.5 * g.extent(0), g.origin()[1] + 0.5 * g.extent(1)};
    const double rate = 2.0 / std::max(g.extent(0), g.extent(1));
    const double d = 1.0 / std::sqrt(2.0);
    return {{1.0, rate, {1.0, 0.0}, centre}, {1.0, rate, {0.0, 1.0}, centre}, {1.0, rate, {-d, -d}, centre}};
}

int run_forward(const ForwardCommand& c, std::ostream& out)
{
    const fs::path phantom_path(c.phantom);
    const Phantom phantom = manifest::read_phantom(phantom_path);
    const GridGeometry& g = phantom.mu_a().geometry();
    const fs::path dir(c.out);
    Json extra;
    Json verification;
    bool passed = true;

    if (c.model == "single-scatter") {
        if (!c.illuminations.empty() || !c.anchor.empty()) {
            throw Error(ErrorCode::InvalidArgument,
                        "--illuminations and --anchor apply to the diffusion model only");
        }
        Beam first;
        Beam second;
        if (!c.beams.empty()) {
            const fs::path beams_path(c.beams);
            const Json beams = manifest::read_json(beams_path);
            if (!beams.is_array() || beams.size() != 2) {
                throw Error(ErrorCode::InvalidArgument, "--beams must list exactly two beams");
            }
            first = manifest::beam_from_json(beams[0], g, beams_path.parent_path());
            second = manifest::beam_from_json(beams[1], g, beams_path.parent_path());
        } else {
            if (c.axis >= g.rank()) {
                throw Error(ErrorCode::InvalidArgument, "--axis exceeds the grid rank");
            }
            first = make_beam(g, c.axis, +1, c.profile);
            second = make_beam(g, c.axis, -1, c.profile);
        }
        manifest::SingleScatterDataset ds;
        ds.data = synthesize_pressures(phantom, first, second);
        ds.phantom = phantom_path;
        const ScalarField mu_t = phantom.mu_t();
        for (const auto& beam : ds.data.beams) {
            ds.fluences.push_back(fluence(mu_t, beam));
        }
        if (c.verify_pde) {
            Json residuals = Json::array();
            for (std::size_t i = 0; i < 2; ++i) {
                const double r = recurrence_residual(mu_t, ds.data.beams[i], ds.fluences[i]);
                residuals.push_back(r);
                passed = passed && r <= c.tolerance;
            }
            verification["check"] = "discrete Beer-Lambert recurrence";
            verification["residuals"] = residuals;
        }
        if (c.verify_pde) {
            verification["tolerance"] = c.tolerance;
            verification["passed"] = passed;
            extra["verification"] = verification;
        }
        const fs::path written = manifest::write_dataset(dir, ds, extra);
        out << "wrote " << written.generic_string() << '\n';
    } else {
        if (!c.beams.empty()) {
            throw Error(ErrorCode::InvalidArgument, "--beams applies to the single-scatter model only");
        }
        if (g.rank() != 2) {
            throw Error(ErrorCode::InvalidGeometry, "the diffusion model needs a 2D phantom");
        }
        manifest::DiffusionDataset ds;
        ds.theta1 = c.theta1;
        ds.phantom = phantom_path;
        if (!c.illuminations.empty()) {
            const Json lights = manifest::read_json(c.illuminations);
            if (!lights.is_array() || lights.empty()) {
                throw Error(ErrorCode::InvalidArgument, "--illuminations must be a nonempty JSON array");
            }
            for (const auto& light : lights) {
                ds.illuminations.push_back(manifest::illumination_from_json(light));
            }
        } else {
            ds.illuminations = default_illuminations(g);
        }
        ds.anchor = c.anchor.empty() ? GridNode2D{g.dim(0) / 2, g.dim(1) / 2}
                                     : GridNode2D{c.anchor[0], c.anchor[1]};
        if (ds.anchor.i >= g.dim(0) || ds.anchor.j >= g.dim(1)) {
            throw Error(ErrorCode::InvalidArgument, "--anchor lies outside the grid");
        }
        Json residuals = Json::array();
        Json iterations = Json::array();
        const ScalarField gm = phantom.gamma_mu_a();
        for (const auto& light : ds.illuminations) {
            const DiffusionProblem problem = make_diffusion_problem(phantom, light, c.theta1);
            DiffusionSolution solution = solve_diffusion(problem, {c.tolerance, 0});
            iterations.push_back(solution.iterations);
            if (c.verify_pde) {
                const double r = diffusion_residual(problem, solution.fluence);
                residuals.push_back(r);
                passed = passed && r <= c.tolerance;
            }
            ds.pressures.push_back(product(gm, solution.fluence));
            ds.fluences.push_back(std::move(solution.fluence));
        }
        const ScalarField sigma = diffusion_coefficient(phantom, c.theta1);
        const std::size_t a = g.flat_index({ds.anchor.i, ds.anchor.j});
        ds.anchor_value = sigma[a] * ds.fluences.back()[a] * ds.fluences.back()[a];
        extra["solver"] = {{"tolerance", c.tolerance}, {"iterations", iterations}};
        if (c.verify_pde) {
            verification["check"] = "diffusion relative residual";
            verification["residuals"] = residuals;
            verification["tolerance"] = c.tolerance;
            verification["passed"] = passed;
            extra["verification"] = verification;
        }
        const fs::path written = manifest::write_dataset(dir, ds, extra);
        out << "wrote " << written.generic_string() << '\n';
    }
    if (c.verify_pde) {
        out << "verify-pde " << (passed ? "passed" : "FAILED") << '\n';
    }
    return passed ? kOk : kInternal;
}

// reconstruct -----------------------------------------------------------------------

struct ReconstructCommand {
    std::string method;
    std::string dataset;
    std::optional<double> epsilon;
    double smooth_width = 0.0;
    double cond_cap = 1e6;
    std::string truth;
    std::size_t margin = 3;
    std::optional<double> max_rel_l2;
    std::string out;
};

void add_reconstruct(CLI::App& app, ReconstructCommand& c)
{
    auto* sub = app.add_subcommand("reconstruct", "Recover coefficients from a dataset");
    sub->add_option("--method", c.method, "ss | ss-transmission | sectional | diffusion-quotient")
        ->check(CLI::IsMember({"ss", "ss-transmission", "sectional", "diffusion-quotient"}))
        ->required();
    sub->add_option("--dataset", c.dataset, "Dataset manifest (dataset.json)")->required();
    sub->add_option("--epsilon", c.epsilon, "Support threshold on P1*P2 (default relative 1e-12)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--smooth-width", c.smooth_width, "Gaussian pre-smoothing width in cells")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--cond-cap", c.cond_cap, "Condition-number cap for the quotient method")
        ->check(CLI::Range(1.0, 1e300))
        ->capture_default_str();
    sub->add_option("--truth", c.truth, "Phantom manifest to score the result against");
    sub->add_option("--margin", c.margin, "Cells removed from the scoring region")->capture_default_str();
    sub->add_option("--max-rel-l2", c.max_rel_l2, "Bound recorded against the primary relative L2 error")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", c.out, "Output directory")->required();
}

Json diagnostics_json(const Diagnostics& d)
{
    Json out;
    out["support_nodes"] = d.support_nodes;
    out["central_nodes"] = d.central_nodes;
    out["one_sided_nodes"] = d.one_sided_nodes;
    out["undefined_nodes"] = d.undefined_nodes;
    out["negative_mu_t_nodes"] = d.negative_mu_t_nodes;
    out["min_mu_t"] = d.min_mu_t;
    out["epsilon"] = d.epsilon;
    out["smoothing_width"] = d.smoothing_width;
    return out;
}

Json quotient_json(const QuotientDiagnostics& d)
{
    Json out;
    out["interior_nodes"] = d.interior_nodes;
    out["well_conditioned_nodes"] = d.well_conditioned_nodes;
    out["ill_conditioned_nodes"] = d.ill_conditioned_nodes;
    out["disconnected_nodes"] = d.disconnected_nodes;
    out["max_path_discrepancy"] = d.max_path_discrepancy;
    out["condition_cap"] = d.condition_cap;
    return out;
}

struct Scored {
    std::string name;
    ScalarField recon;
    ScalarField truth;
};

/// Scores each field on `region`; returns the first relative error.
double score(Json& report, const std::vector<Scored>& fields, const Mask& region)
{
    report["region_nodes"] = region.count();
    if (region.count() == 0) {
        report["metrics"] = nullptr;
        return std::nan("");
    }
    Json metrics;
    for (const auto& f : fields) {
        metrics[f.name] = metrics_json(field_metrics(f.recon, f.truth, region));
    }
    const double primary = metrics[fields.front().name]["masked_rel_l2"].get<double>();
    report["metrics"] = metrics;
    return primary;
}

int run_reconstruct(const ReconstructCommand& c, std::ostream& out)
{
    const fs::path dataset_path(c.dataset);
    const manifest::Dataset dataset = manifest::read_dataset(dataset_path);
    const fs::path dir(c.out);
    fs::create_directories(dir);

    Json report;
    report["method"] = c.method;
    report["dataset"] = relative_path(dataset_path, dir);
    Json outputs;
    auto emit = [&](const std::string& name, const ScalarField& field) {
        write_grid(dir / (name + ".paqg"), field);
        outputs[name] = name + ".paqg";
    };
    std::optional<Phantom> truth;
    if (!c.truth.empty()) {
        truth = manifest::read_phantom(c.truth);
        report["truth"] = relative_path(c.truth, dir);
        report["margin"] = c.margin;
    }
    double primary = std::nan("");
    std::size_t mask_nodes = 0;

    if (c.method == "diffusion-quotient") {
        const auto* ds = std::get_if<manifest::DiffusionDataset>(&dataset);
        if (ds == nullptr) {
            throw Error(ErrorCode::InvalidArgument, "method diffusion-quotient needs a diffusion dataset");
        }
        QuotientOptions options;
        options.condition_cap = c.cond_cap;
        const QuotientResult r = recover_diffusion_quotient(ds->pressures, ds->anchor, ds->anchor_value, options);
        emit("v", r.v);
        emit("comb1", r.comb1);
        emit("comb2", r.comb2);
        emit("mask", to_field(r.mask));
        emit("comb2_mask", to_field(r.comb2_mask));
        report["outputs"] = outputs;
        report["diagnostics"] = quotient_json(r.diagnostics);
        mask_nodes = r.mask.count();
        if (truth) {
            const Mask region = intersect(r.mask, interior(r.mask.geometry, c.margin));
            primary = score(report, {{"comb1", r.comb1, comb1_truth(*truth, ds->theta1)}}, region);
        }
    } else {
        const auto* ds = std::get_if<manifest::SingleScatterDataset>(&dataset);
        if (ds == nullptr) {
            throw Error(ErrorCode::InvalidArgument, "method " + c.method + " needs a single-scatter dataset");
        }
        if (c.method == "ss-transmission" && !ds->data.transmissions) {
            throw Error(ErrorCode::TransmissionRequired, "the dataset carries no transmitted fluences");
        }
        const RecoveryOptions options{c.epsilon, c.smooth_width};
        const ReconstructionResult r = c.method == "sectional" ? recover_sectional(ds->data, options)
                                                               : reconstruct_single_scatter(ds->data, options);
        const ScalarField& gamma_mu_a =
            c.method == "ss-transmission" ? *r.gamma_mu_a_transmission : r.gamma_mu_a;
        emit("mu_t", r.mu_t);
        emit("gamma_mu_a", gamma_mu_a);
        if (c.method != "ss-transmission" && r.gamma_mu_a_transmission) {
            emit("gamma_mu_a_transmission", *r.gamma_mu_a_transmission);
        }
        emit("mask", to_field(r.support.mask));
        report["outputs"] = outputs;
        report["support"] = {{"epsilon", r.support.epsilon}, {"nodes", r.support.mask.count()}};
        report["diagnostics"] = diagnostics_json(r.diagnostics);
        mask_nodes = r.support.mask.count();
        if (truth) {
            const ScalarField gm_truth = truth->gamma_mu_a();
            std::vector<Scored> fields{{"mu_t", r.mu_t, truth->mu_t()}, {"gamma_mu_a", gamma_mu_a, gm_truth}};
            if (c.method != "ss-transmission" && r.gamma_mu_a_transmission) {
                fields.push_back({"gamma_mu_a_transmission", *r.gamma_mu_a_transmission, gm_truth});
            }
            primary = score(report, fields, erode(r.support.mask, c.margin));
        }
    }

    if (c.max_rel_l2) {
        report["max_rel_l2"] = *c.max_rel_l2;
        report["within_bound"] = std::isfinite(primary) && primary <= *c.max_rel_l2;
    }
    manifest::write_json(dir / "report.json", report);
    out << "wrote " << (dir / "report.json").generic_string() << '\n';
    if (std::isfinite(primary)) {
        out << "relative L2 error " << number(primary) << '\n';
    }
    if (mask_nodes == 0) {
        throw Error(ErrorCode::EmptySupport, "reconstruction mask is empty");
    }
    return kOk;
}

// compare ---------------------------------------------------------------------------

struct CompareCommand {
    std::string recon;
    std::string truth;
    std::string quantity;
    std::string mask;
    std::size_t margin = 0;
    double theta1 = 0.0;
    std::string out;
};

void add_compare(CLI::App& app, CompareCommand& c)
{
    auto* sub = app.add_subcommand("compare", "Score a reconstructed field against ground truth");
    sub->add_option("--recon", c.recon, "Reconstructed .paqg field or report.json")->required();
    sub->add_option("--truth", c.truth, "Ground-truth .paqg field or phantom manifest.json")->required();
    sub->add_option("--quantity", c.quantity,
                    "Field name: mu_t, gamma_mu_a, gamma_mu_a_transmission, mu_a, mu_s, gamma, comb1");
    sub->add_option("--mask", c.mask, "Region mask .paqg (default: the report's mask, else all nodes)");
    sub->add_option("--margin", c.margin, "Exclude a boundary band of this many cells")->capture_default_str();
    sub->add_option("--theta1", c.theta1, "Phase-function moment used for comb1 truth")
        ->check(CLI::Range(-3.0, 3.0));
    sub->add_option("--out", c.out, "Output directory")->required();
}

bool is_json(const std::string& path) { return fs::path(path).extension() == ".json"; }

ScalarField truth_quantity(const Phantom& p, const std::string& quantity, double theta1)
{
    if (quantity == "mu_t") return p.mu_t();
    if (quantity == "gamma_mu_a" || quantity == "gamma_mu_a_transmission") return p.gamma_mu_a();
    if (quantity == "mu_a") return p.mu_a();
    if (quantity == "mu_s") return p.mu_s();
    if (quantity == "gamma") return p.gamma();
    if (quantity == "comb1") return comb1_truth(p, theta1);
    throw Error(ErrorCode::InvalidArgument, "--quantity '" + quantity + "' has no phantom counterpart");
}

void write_profiles(const fs::path& path, const ScalarField& recon, const ScalarField& truth, const Mask& region)
{
    std::ofstream csv(path, std::ios::binary | std::ios::trunc);
    if (!csv) {
        throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    }
    const GridGeometry& g = recon.geometry();
    const bool three = g.rank() == 3;
    csv << (three ? "i,j,k,x,y,z" : "i,j,x,y") << ",recon,truth,abs_error,in_region\n";
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto idx = g.unravel(n);
        csv << idx[0] << ',' << idx[1] << ',';
        if (three) {
            csv << idx[2] << ',';
        }
        csv << number(g.coordinate(0, idx[0])) << ',' << number(g.coordinate(1, idx[1])) << ',';
        if (three) {
            csv << number(g.coordinate(2, idx[2])) << ',';
        }
        csv << number(recon[n]) << ',' << number(truth[n]) << ',' << number(std::abs(recon[n] - truth[n])) << ','
            << (region.contains(n) ? 1 : 0) << '\n';
    }
    if (!csv) {
        throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
}

int run_compare(const CompareCommand& c, std::ostream& out)
{
    std::optional<ScalarField> recon;
    std::optional<Mask> mask;
    if (is_json(c.recon)) {
        const Json report = manifest::read_json(c.recon);
        if (c.quantity.empty()) {
            throw Error(ErrorCode::InvalidArgument, "--quantity is required with a report.json");
        }
        if (!report.contains("outputs") || !report["outputs"].contains(c.quantity)) {
            throw Error(ErrorCode::InvalidArgument, "report has no output named '" + c.quantity + "'");
        }
        const fs::path base = fs::path(c.recon).parent_path();
        recon = read_grid(base / report["outputs"][c.quantity].get<std::string>());
        if (c.mask.empty() && report["outputs"].contains("mask")) {
            mask = from_field(read_grid(base / report["outputs"]["mask"].get<std::string>()));
        }
    } else {
        recon = read_grid(c.recon);
    }

    std::optional<ScalarField> truth;
    if (is_json(c.truth)) {
        if (c.quantity.empty()) {
            throw Error(ErrorCode::InvalidArgument, "--quantity is required with a phantom manifest");
        }
        truth = truth_quantity(manifest::read_phantom(c.truth), c.quantity, c.theta1);
    } else {
        truth = read_grid(c.truth);
    }
    require_same_geometry(recon->geometry(), truth->geometry(), "compare");
    if (!c.mask.empty()) {
        mask = from_field(read_grid(c.mask));
    }
    Mask region = interior(recon->geometry(), c.margin);
    if (mask) {
        require_same_geometry(mask->geometry, recon->geometry(), "compare mask");
        region = intersect(region, *mask);
    }

    const fs::path dir(c.out);
    fs::create_directories(dir);
    Json report;
    report["recon"] = relative_path(c.recon, dir);
    report["truth"] = relative_path(c.truth, dir);
    if (!c.quantity.empty()) {
        report["quantity"] = c.quantity;
    }
    report["margin"] = c.margin;
    report["region_nodes"] = region.count();
    const MetricsReport m = field_metrics(*recon, *truth, region);
    report["metrics"] = metrics_json(m);
    manifest::write_json(dir / "metrics.json", report);
    write_profiles(dir / "profiles.csv", *recon, *truth, region);
    out << "relative L2 error " << number(m.masked_rel_l2) << " over " << m.masked_count << " nodes\n";
    return kOk;
}

// verify ----------------------------------------------------------------------------

struct VerifyCommand {
    std::size_t order = 16;
    std::size_t n = 33;
    std::uint64_t seed = 1;
    std::string out;
};

void add_verify(CLI::App& app, VerifyCommand& c)
{
    auto* sub = app.add_subcommand("verify", "Run the built-in invariant checks");
    sub->add_option("--order", c.order, "Sphere quadrature order")->check(CLI::Range(2, 512))->capture_default_str();
    sub->add_option("--n", c.n, "Coarse grid size for the refinement checks")
        ->check(CLI::Range(9, 1025))
        ->capture_default_str();
    sub->add_option("--seed", c.seed, "Seed for the gauge-test phantom")->capture_default_str();
    sub->add_option("--out", c.out, "Optional JSON report path");
}

ScalarField sample(const GridGeometry& g, double (*f)(double, double))
{
    std::vector<double> values(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        const auto idx = g.unravel(n);
        values[n] = f(g.coordinate(0, idx[0]), g.coordinate(1, idx[1]));
    }
    return ScalarField(g, std::move(values));
}

// cosh(2 (x - 1/2)) solves sigma phi'' = mu_a phi for sigma = 1/12, mu_a = 1/3.
double cosh_exact(double x, double) { return std::cosh(2.0 * (x - 0.5)); }
double smooth_mu(double x, double y) { return 1.0 + 0.5 * std::sin(3.0 * x + y); }

DiffusionProblem cosh_problem(std::size_t n)
{
    const GridGeometry g = GridGeometry::uniform({n, n});
    return {g, ScalarField::filled(g, 1.0 / 3.0), ScalarField::filled(g, 1.0 / 12.0), sample(g, cosh_exact)};
}

double cosh_error(std::size_t n)
{
    const DiffusionProblem problem = cosh_problem(n);
    const ScalarField phi = solve_diffusion(problem).fluence;
    double worst = 0.0;
    for (std::size_t k = 0; k < phi.size(); ++k) {
        worst = std::max(worst, std::abs(phi[k] - problem.boundary_fluence[k]));
    }
    return worst;
}

double transport_error(std::size_t n)
{
    const GridGeometry g = GridGeometry::uniform({n, n});
    const ScalarField mu = sample(g, smooth_mu);
    const Beam beam = make_beam(g, 0, +1);
    double worst = 0.0;
    for (double v : transport_residual(mu, beam, fluence(mu, beam)).values()) {
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

double gauge_deviation(std::uint64_t seed)
{
    XorShift64Star rng(seed);
    const GridGeometry g = GridGeometry::uniform({24, 24});
    std::vector<double> gamma(g.size());
    std::vector<double> mu_a(g.size());
    std::vector<double> mu_s(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        gamma[n] = rng.uniform(0.5, 2.0);
        mu_a[n] = rng.uniform(0.1, 1.0);
        mu_s[n] = mu_a[n] + rng.uniform(0.0, 1.0);
    }
    const Beam first = make_beam(g, 0, +1);
    const Beam second = make_beam(g, 0, -1);
    const IlluminationDataSet base =
        synthesize_pressures(Phantom(ScalarField(g, gamma), ScalarField(g, mu_a), ScalarField(g, mu_s)), first, second);
    double worst = 0.0;
    for (double t : {0.5, 2.0}) {
        std::vector<double> g2(g.size());
        std::vector<double> a2(g.size());
        std::vector<double> s2(g.size());
        for (std::size_t n = 0; n < g.size(); ++n) {
            g2[n] = gamma[n] / t;
            a2[n] = t * mu_a[n];
            s2[n] = mu_s[n] + (1.0 - t) * mu_a[n];
        }
        const IlluminationDataSet moved =
            synthesize_pressures(Phantom(ScalarField(g, g2), ScalarField(g, a2), ScalarField(g, s2)), first, second);
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t n = 0; n < g.size(); ++n) {
                const double ref = base.pressures[i][n];
                worst = std::max(worst, std::abs(moved.pressures[i][n] - ref) / std::abs(ref));
            }
        }
    }
    return worst;
}

int run_verify(const VerifyCommand& c, std::ostream& out)
{
    struct Check {
        std::string name;
        double value;
        double bound;
        bool at_least;
    };
    const std::size_t fine = 2 * c.n - 1;
    const DiffusionProblem problem = cosh_problem(c.n);
    const DiffusionSolution solution = solve_diffusion(problem);
    const GridGeometry g = GridGeometry::uniform({c.n, c.n});
    const ScalarField mu = sample(g, smooth_mu);
    const Beam beam = make_beam(g, 1, -1);

    const std::vector<Check> checks{
        {"sphere_moment", sphere_moment_check(c.order), 1e-10, false},
        {"diffusion_residual", diffusion_residual(problem, solution.fluence), 1e-10, false},
        {"cosh_order", cosh_error(c.n) / cosh_error(fine), 3.5, true},
        {"transport_order", transport_error(c.n) / transport_error(fine), 3.5, true},
        {"beer_lambert_recurrence", recurrence_residual(mu, beam, fluence(mu, beam)), 1e-12, false},
        {"gauge", gauge_deviation(c.seed), 1e-12, false},
    };
    Json report = Json::array();
    bool all = true;
    for (const auto& check : checks) {
        const bool ok = check.at_least ? check.value >= check.bound : check.value <= check.bound;
        all = all && ok;
        out << (ok ? "PASS " : "FAIL ") << check.name << ' ' << number(check.value)
            << (check.at_least ? " >= " : " <= ") << check.bound << '\n';
        report.push_back({{"name", check.name}, {"value", check.value}, {"bound", check.bound}, {"passed", ok}});
    }
    if (!c.out.empty()) {
        manifest::write_json(c.out, report);
    }
    return all ? kOk : kInternal;
}

// config ----------------------------------------------------------------------------

std::vector<std::string> config_tokens(const CLI::App& sub, const fs::path& path)
{
    const Json config = manifest::read_json(path);
    if (!config.is_object()) {
        throw Error(ErrorCode::InvalidArgument, "--config file must hold a JSON object");
    }
    std::vector<std::string> tokens;
    for (const auto& item : config.items()) {
        const std::string flag = "--" + item.key();
        const CLI::Option* option = sub.get_option_no_throw(flag);
        if (option == nullptr || item.key() == "config" || item.key() == "help") {
            throw Error(ErrorCode::InvalidArgument, "unknown config key '" + item.key() + "'");
        }
        auto text = [&](const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
        const Json& value = item.value();
        if (option->get_type_size() == 0) {
            if (!value.is_boolean()) {
                throw Error(ErrorCode::InvalidArgument, "config key '" + item.key() + "' must be true or false");
            }
            if (value.get<bool>()) {
                tokens.push_back(flag);
            }
        } else if (value.is_array()) {
            tokens.push_back(flag);
            for (const auto& element : value) {
                tokens.push_back(text(element));
            }
        } else if (value.is_object() || value.is_null()) {
            throw Error(ErrorCode::InvalidArgument, "config key '" + item.key() + "' must be a scalar or array");
        } else {
            tokens.push_back(flag);
            tokens.push_back(text(value));
        }
    }
    return tokens;
}

/// Splices --config file contents in right after the subcommand name, so
/// that later command-line flags win.
std::vector<std::string> expand_config(const CLI::App& app, const std::vector<std::string>& args)
{
    std::vector<std::string> rest;
    std::optional<std::string> config;
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config") {
            if (k + 1 >= args.size()) {
                throw Error(ErrorCode::InvalidArgument, "--config needs a path");
            }
            config = args[++k];
        } else if (args[k].rfind("--config=", 0) == 0) {
            config = args[k].substr(9);
        } else {
            rest.push_back(args[k]);
        }
    }
    if (!config) {
        return args;
    }
    if (rest.empty()) {
        throw Error(ErrorCode::InvalidArgument, "--config needs a subcommand");
    }
    const CLI::App* sub = nullptr;
    try {
        sub = app.get_subcommand(rest.front());
    } catch (const CLI::OptionNotFound&) {
        throw Error(ErrorCode::InvalidArgument, "unknown subcommand '" + rest.front() + "'");
    }
    std::vector<std::string> expanded{rest.front()};
    for (auto& token : config_tokens(*sub, *config)) {
        expanded.push_back(std::move(token));
    }
    expanded.insert(expanded.end(), rest.begin() + 1, rest.end());
    return expanded;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Quantitative photoacoustic forward models and reconstructions", "qpat"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    PhantomCommand phantom;
    ForwardCommand forward;
    ReconstructCommand reconstruct;
    CompareCommand compare;
    VerifyCommand verify;
    add_phantom(app, phantom);
    add_forward(app, forward);
    add_reconstruct(app, reconstruct);
    add_compare(app, compare);
    add_verify(app, verify);
    std::string unused_config;
    for (CLI::App* sub : app.get_subcommands({})) {
        sub->add_option("--config", unused_config, "JSON file of flag values; command-line flags take precedence");
    }

    try {
        std::vector<std::string> expanded = expand_config(app, args);
        std::reverse(expanded.begin(), expanded.end());
        try {
            app.parse(expanded);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return kOk;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return kOk;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << '\n';
            return kValidation;
        }

        if (app.got_subcommand("phantom")) return run_phantom(phantom, out);
        if (app.got_subcommand("forward")) return run_forward(forward, out);
        if (app.got_subcommand("reconstruct")) return run_reconstruct(reconstruct, out);
        if (app.got_subcommand("compare")) return run_compare(compare, out);
        return run_verify(verify, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed manifest: " << e.what() << '\n';
        return kValidation;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kMissingInput;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}

}  // namespace qpat::cli
