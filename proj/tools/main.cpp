// coalesce: command-line front end for the coalescing-walk analytics and
// simulator. Subcommands emit CSV tables, whitespace mesh files and JSON
// sidecars; every simulation requires an explicit seed and reruns with the
// same inputs are byte-identical.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "coalesce/detcore.hpp"
#include "coalesce/gaps.hpp"
#include "coalesce/kernels.hpp"
#include "coalesce/sim.hpp"
#include "coalesce/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace coalesce;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitConfig = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitAcceptance = 4;

// 12 significant digits, scientific; the single formatting used everywhere
std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.11e", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string file_digest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(ss.str())));
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot open output file " + path.string());
    out << content;
}

json manifest_for(const std::string& subcommand, const json& config,
                  const std::vector<fs::path>& outputs) {
    json m;
    m["subcommand"] = subcommand;
    m["config"] = config;
    m["version"] = kVersion;
    m["timestamp"] = static_cast<long>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    json files = json::array();
    for (const auto& p : outputs)
        files.push_back({{"path", p.string()}, {"digest", file_digest(p)}});
    m["outputs"] = files;
    return m;
}

Kernel make_kernel(const std::string& model, double horizon, int parity) {
    if (model == "ct") return Kernel::ct_simple_walk(horizon);
    if (model == "parity") return Kernel::parity_walk(std::lround(horizon), parity);
    throw DomainError("unknown model '" + model + "' (expected ct or parity)");
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "inf" || item == "+inf")
            out.push_back(std::numeric_limits<double>::infinity());
        else
            out.push_back(std::stod(item));
    }
    if (out.empty()) throw DomainError("empty list argument");
    return out;
}

// --- subcommands -------------------------------------------------------------

int cmd_gap_pmf(const std::string& model, double horizon, int parity, long gmax,
                const std::string& out) {
    Kernel kernel = make_kernel(model, horizon, parity);
    long spacing = kernel.lattice_spacing();
    Kernel doubled = kernel.with_horizon(2.0 * horizon);
    double total = discrete_gap_total(kernel);

    std::ostringstream csv;
    csv << "g,mu,pmf,cumulative\n";
    double cum = 0.0;
    for (long g = spacing; g <= gmax; g += spacing) {
        double mu = discrete_gap_intensity(kernel, g);
        double pmf = mu / total;
        cum += pmf;
        csv << g << ',' << num(mu) << ',' << num(pmf) << ',' << num(cum) << '\n';
    }
    write_file(out, csv.str());

    json side;
    side["model"] = model;
    side["horizon"] = horizon;
    side["lattice_spacing"] = spacing;
    side["total_intensity"] = total;
    side["telescoped_total"] = {{"p_2t_0", doubled.mass(0, 0)},
                                {"p_2t_spacing", doubled.mass(0, spacing)}};
    write_file(out + ".json", side.dump(2) + "\n");

    json config = {{"model", model}, {"T", horizon}, {"gmax", gmax}, {"out", out}};
    write_file(out + ".manifest.json",
               manifest_for("gap-pmf", config, {out, out + ".json"}).dump(2) + "\n");
    return 0;
}

int cmd_rayleigh(const std::string& out, long points, double gmax) {
    std::ostringstream csv;
    csv << "G,intensity,pdf\n";
    for (long i = 1; i <= points; ++i) {
        double g = gmax * static_cast<double>(i) / static_cast<double>(points);
        csv << num(g) << ',' << num(rayleigh_gap_density(g)) << ',' << num(rayleigh_gap_pdf(g))
            << '\n';
    }
    write_file(out, csv.str());

    json side;
    side["total_intensity"] = rayleigh_total();
    side["mean_gap_rescaled"] = std::sqrt(M_PI);
    side["variance_rescaled"] = 4.0 - M_PI;
    write_file(out + ".json", side.dump(2) + "\n");

    json config = {{"out", out}, {"points", points}, {"gmax", gmax}};
    write_file(out + ".manifest.json",
               manifest_for("rayleigh", config, {out, out + ".json"}).dump(2) + "\n");
    return 0;
}

int cmd_joint_gap(long rows, double gmax, double tol, const std::string& out, bool with_rho) {
    QuadratureSpec spec;
    spec.relative_tolerance = tol;
    spec.absolute_tolerance = tol * 1e-3;
    auto mesh = joint_gap_mesh(rows, gmax, spec);

    std::ostringstream dat;
    for (long i = 0; i < rows; ++i) {
        for (long j = 0; j < rows; ++j)
            dat << num(mesh.grid[static_cast<std::size_t>(i)]) << ' '
                << num(mesh.grid[static_cast<std::size_t>(j)]) << ' '
                << num(mesh.values[static_cast<std::size_t>(i * rows + j)]) << '\n';
        dat << '\n'; // blank line between rows
    }
    write_file(out, dat.str());

    json side;
    side["rows"] = rows;
    side["gmax"] = gmax;
    side["max_quadrature_error"] = mesh.max_error;
    if (with_rho) {
        auto corr = gap_correlation(spec);
        side["rho"] = corr.rho;
        side["rho_error"] = corr.rho_error;
        side["total_intensity"] = corr.total;
        std::printf("rho = %s +/- %s\n", num(corr.rho).c_str(), num(corr.rho_error).c_str());
    }
    write_file(out + ".json", side.dump(2) + "\n");

    json config = {{"grid-rows", rows}, {"gmax", gmax}, {"tol", tol}, {"out", out}};
    write_file(out + ".manifest.json",
               manifest_for("joint-gap", config, {out, out + ".json"}).dump(2) + "\n");
    return 0;
}

int cmd_warren(const std::string& model, double horizon, int parity, const std::string& starts_csv,
               const std::string& thresholds_csv, long mc, std::uint64_t seed, bool seed_set) {
    Kernel kernel = make_kernel(model, horizon, parity);
    auto starts = parse_list(starts_csv);
    auto thresholds = parse_list(thresholds_csv);
    auto p = warren_cdf(kernel, starts, thresholds);
    std::printf("warren_cdf = %s%s\n", num(p.value).c_str(), p.flagged ? "  [flagged]" : "");
    if (mc > 0) {
        if (!seed_set) throw DomainError("--mc requires an explicit --seed");
        auto est = empirical_warren_cdf(model == "ct" ? SimModel::CtSimpleWalk
                                                      : SimModel::ParityWalk,
                                        horizon, starts, thresholds, mc, seed, parity);
        double z = est.se > 0 ? (est.p_hat - p.value) / est.se : 0.0;
        std::printf("monte_carlo = %s +/- %s  (replicates %ld)\n", num(est.p_hat).c_str(),
                    num(est.se).c_str(), mc);
        std::printf("z_score = %s\n", num(z).c_str());
    }
    return 0;
}

int cmd_intensity(const std::string& walls_csv, const std::string& survivors_csv, double horizon,
                  bool halfline) {
    WallParticlePattern pattern(parse_list(walls_csv), parse_list(survivors_csv));
    double det = halfline ? determinant(halfline_m0(pattern, horizon))
                          : determinant(brownian_m0(pattern, horizon));
    std::printf("%s_intensity = %s\n", halfline ? "halfline" : "wall_particle",
                num(det).c_str());
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    std::ifstream in(config_path);
    if (!in) throw DomainError("cannot read config " + config_path);
    json j = json::parse(in);

    SimulationConfig cfg;
    std::string model = j.at("model").get<std::string>();
    if (model == "parity_walk")
        cfg.model = SimModel::ParityWalk;
    else if (model == "ct_simple_walk")
        cfg.model = SimModel::CtSimpleWalk;
    else if (model == "brownian_fine_lattice")
        cfg.model = SimModel::BrownianFineLattice;
    else
        throw DomainError("unknown model " + model);
    cfg.horizon = j.at("horizon").get<double>();
    cfg.window_halfwidth = j.at("window_halfwidth").get<double>();
    cfg.margin_sigmas = j.value("margin_sigmas", 6.0);
    cfg.lattice_spacing = j.value("lattice_spacing", 0.01);
    cfg.replicates = j.at("replicates").get<long>();
    if (!j.contains("seed")) throw DomainError("simulation config requires an explicit seed");
    cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("occupancy")) {
        const auto& occ = j.at("occupancy");
        if (occ.is_array()) {
            cfg.occupancy = Occupancy::ExplicitSites;
            cfg.explicit_sites = occ.get<std::vector<double>>();
        } else if (occ.get<std::string>() == "sublattice") {
            cfg.occupancy = Occupancy::Sublattice;
        } else if (occ.get<std::string>() == "all_sites") {
            cfg.occupancy = Occupancy::AllSites;
        } else {
            throw DomainError("unknown occupancy");
        }
    } else if (cfg.model == SimModel::ParityWalk) {
        cfg.occupancy = Occupancy::Sublattice;
    }
    cfg.sublattice_parity = j.value("sublattice_parity", 0);

    GapStatisticsConfig sc;
    sc.discrete_bins = cfg.model != SimModel::BrownianFineLattice;
    double default_bin = cfg.model == SimModel::ParityWalk ? 2.0
                         : cfg.model == SimModel::CtSimpleWalk ? 1.0
                                                               : 0.1;
    sc.bin_width = j.value("bin_width", default_bin);
    sc.bins = j.value("bins", 64L);

    auto stats = collect_gap_statistics(cfg, sc);

    fs::create_directories(out_dir);
    fs::path hist_path = fs::path(out_dir) / "gap_histogram.csv";
    std::ostringstream csv;
    csv << "bin_center,gap_frac,gap_se,wall_gap_frac,wall_gap_se\n";
    for (long b = 0; b < sc.bins; ++b) {
        double center = sc.discrete_bins ? sc.bin_width * static_cast<double>(b + 1)
                                         : sc.bin_width * (static_cast<double>(b) + 0.5);
        csv << num(center) << ',' << num(stats.gap_frac[static_cast<std::size_t>(b)].mean) << ','
            << num(stats.gap_frac[static_cast<std::size_t>(b)].se()) << ','
            << num(stats.wall_gap_frac[static_cast<std::size_t>(b)].mean) << ','
            << num(stats.wall_gap_frac[static_cast<std::size_t>(b)].se()) << '\n';
    }
    write_file(hist_path, csv.str());

    json summary;
    summary["replicates"] = stats.replicates;
    summary["total_gaps"] = stats.total_gaps;
    summary["survivor_density"] = {{"mean", stats.density.mean}, {"se", stats.density.se()}};
    summary["adjacent_gap_correlation"] = {{"mean", stats.rho.mean},
                                           {"se", stats.rho.se()},
                                           {"replicates_used", stats.rho.n}};
    fs::path summary_path = fs::path(out_dir) / "summary.json";
    write_file(summary_path, summary.dump(2) + "\n");

    fs::path manifest_path = fs::path(out_dir) / "manifest.json";
    write_file(manifest_path,
               manifest_for("simulate", j, {hist_path, summary_path}).dump(2) + "\n");
    std::printf("wrote %s\n", out_dir.c_str());
    return 0;
}

int cmd_verify(const std::string& suite, const std::string& report_path) {
    auto results = run_acceptance(suite, std::cout);
    if (!report_path.empty()) {
        json rep = json::array();
        for (const auto& r : results)
            rep.push_back({{"id", r.id},
                           {"name", r.name},
                           {"suite", r.suite},
                           {"passed", r.passed},
                           {"detail", r.detail},
                           {"seconds", r.seconds}});
        write_file(report_path, rep.dump(2) + "\n");
    }
    for (const auto& r : results)
        if (!r.passed) return kExitAcceptance;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coalescing skip-free particle systems: determinantal analytics and simulation"};
    app.set_version_flag("--version", kVersion);
    app.footer("Thread count is read from COALESCE_THREADS (default: hardware concurrency).");
    app.require_subcommand(1);

    // gap-pmf
    std::string model = "ct", out;
    double horizon = 1.0;
    int parity = 0;
    long gmax = 40;
    auto* gap = app.add_subcommand("gap-pmf", "discrete gap intensity and pmf table");
    gap->add_option("--model", model, "ct | parity")->capture_default_str();
    gap->add_option("--T", horizon, "horizon (steps for parity)")->capture_default_str();
    gap->add_option("--parity", parity, "occupied sublattice parity (parity model)");
    gap->add_option("--gmax", gmax, "largest gap")->capture_default_str();
    gap->add_option("--out", out, "output CSV path")->required();

    // rayleigh
    std::string rout;
    long rpoints = 120;
    double rgmax = 6.0;
    auto* ray = app.add_subcommand("rayleigh", "rescaled gap intensity density and constants");
    ray->add_option("--out", rout)->required();
    ray->add_option("--points", rpoints)->capture_default_str();
    ray->add_option("--gmax", rgmax)->capture_default_str();

    // joint-gap
    long rows = 56;
    double jgmax = 2.5, jtol = 1e-8;
    std::string jout;
    bool no_rho = false;
    auto* jg = app.add_subcommand("joint-gap", "joint gap intensity mesh and correlation");
    jg->add_option("--grid-rows", rows)->capture_default_str();
    jg->add_option("--gmax", jgmax)->capture_default_str();
    jg->add_option("--tol", jtol)->capture_default_str();
    jg->add_option("--out", jout)->required();
    jg->add_flag("--no-rho", no_rho, "skip the correlation computation");

    // warren
    std::string wmodel = "ct", wstarts, wthresholds;
    double whorizon = 1.0;
    int wparity = 0;
    long wmc = 0;
    std::uint64_t wseed = 0;
    auto* wa = app.add_subcommand("warren", "determinantal joint CDF of survivor positions");
    wa->add_option("--model", wmodel)->capture_default_str();
    wa->add_option("--T", whorizon)->capture_default_str();
    wa->add_option("--parity", wparity);
    wa->add_option("--starts", wstarts, "comma-separated start sites")->required();
    wa->add_option("--thresholds", wthresholds, "comma-separated thresholds (inf allowed)")
        ->required();
    wa->add_option("--mc", wmc, "Monte Carlo replicates for cross-validation");
    auto* wseed_opt = wa->add_option("--seed", wseed, "seed (required with --mc)");

    // intensity
    std::string iwalls, isurv;
    double ihorizon = 1.0;
    bool ihalf = false;
    auto* in = app.add_subcommand("intensity", "wall-particle intensity determinant");
    in->add_option("--walls", iwalls)->required();
    in->add_option("--survivors", isurv)->required();
    in->add_option("--T", ihorizon)->capture_default_str();
    in->add_flag("--halfline", ihalf, "reflected half-line system");

    // simulate
    std::string scfg, sout;
    auto* si = app.add_subcommand("simulate", "Monte Carlo run from a JSON config");
    si->add_option("--config", scfg)->required();
    si->add_option("--out", sout, "output directory")->required();

    // verify
    std::string vsuite = "all", vreport;
    auto* ve = app.add_subcommand("verify", "run the acceptance suites");
    ve->add_option("--suite", vsuite, "oracle | quadrature | montecarlo | all")
        ->capture_default_str();
    ve->add_option("--out", vreport, "JSON report path");

    try {
        app.parse(argc, argv);
        if (gap->parsed()) return cmd_gap_pmf(model, horizon, parity, gmax, out);
        if (ray->parsed()) return cmd_rayleigh(rout, rpoints, rgmax);
        if (jg->parsed()) return cmd_joint_gap(rows, jgmax, jtol, jout, !no_rho);
        if (wa->parsed())
            return cmd_warren(wmodel, whorizon, wparity, wstarts, wthresholds, wmc, wseed,
                              wseed_opt->count() > 0);
        if (in->parsed()) return cmd_intensity(iwalls, isurv, ihorizon, ihalf);
        if (si->parsed()) return cmd_simulate(scfg, sout);
        if (ve->parsed()) return cmd_verify(vsuite, vreport);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    } catch (const NonConvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNonConvergence;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return 0;
}
