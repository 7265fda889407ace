#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sectoral/acceptance.hpp"
#include "sectoral/analysis.hpp"
#include "sectoral/export.hpp"
#include "sectoral/spec_io.hpp"

namespace fs = std::filesystem;
using namespace sectoral;

namespace {

enum Exit { ok = 0, spec_error = 2, numeric_error = 3, acceptance_failure = 4 };

struct Flags {
    std::string spec_path;
    std::string out = "out";
    std::string box, n, shift, rect, res;
    std::optional<double> p, alpha, gamma;
    std::optional<int> angles;
    std::optional<std::uint64_t> seed;
    std::string stencil = "expanded";
    std::string kind = "P";
    bool plot = false, empirical = false, save_matrix = false;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParameterError(std::string("cannot parse ") + what + " value '" + item + "'");
        }
    }
    if (v.empty()) throw ParameterError(std::string("empty ") + what);
    return v;
}

std::vector<int> parse_ints(const std::string& text, const char* what) {
    std::vector<int> out;
    for (double x : parse_list(text, what)) {
        if (x != std::floor(x)) throw ParameterError(std::string(what) + " must be integers");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

// CLI flags override spec-file fields, which override defaults.
RunConfig resolve(const Flags& f, RunConfig c) {
    if (!f.box.empty()) c.box = parse_list(f.box, "--box");
    if (!f.n.empty()) c.n = parse_ints(f.n, "--n");
    if (!f.shift.empty()) {
        const auto z = parse_list(f.shift, "--shift");
        if (z.size() != 2) throw ParameterError("--shift takes re,im");
        c.shift = complex_t{z[0], z[1]};
    }
    if (f.p) c.p = *f.p;
    if (f.angles) c.angles = *f.angles;
    if (f.seed) c.seed = *f.seed;
    if (f.gamma) c.gamma = *f.gamma;
    if (!f.rect.empty()) c.rect = parse_list(f.rect, "--rect");
    if (!f.res.empty()) c.res = parse_ints(f.res, "--res");

    for (double b : c.box)
        if (!(b > 0.0)) throw ParameterError("box halfwidths must be positive");
    for (int v : c.n)
        if (v < 2) throw ParameterError("grid sizes must be at least 2");
    if (c.angles < 64) throw ParameterError("--angles must be at least 64");
    if (!(c.gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
    if (!c.rect.empty() && (c.rect.size() != 4 || !(c.rect[1] > c.rect[0]) || !(c.rect[3] > c.rect[2])))
        throw ParameterError("--rect takes re_min,re_max,im_min,im_max with min < max");
    if (!c.res.empty()) {
        if (c.res.size() == 1) c.res.push_back(c.res[0]);
        if (c.res.size() != 2 || c.res[0] < 1 || c.res[1] < 1 || c.res[0] > 200 || c.res[1] > 200)
            throw BudgetError("pseudospectrum resolution must be within 1..200 per axis");
    }
    if (c.p && !(*c.p > 0.0)) throw ParameterError("--p must be positive");
    return c;
}

struct Context {
    OperatorSpec spec;
    RunConfig config;
    Flags flags;
    fs::path out;
    std::optional<Manifest> manifest; // flushed as partial when a numeric error escapes
};

json manifest_header(const Context& ctx, const std::string& command) {
    json cfg = ctx.config.to_json();
    cfg["stencil"] = ctx.flags.stencil;
    cfg["kind"] = ctx.flags.kind;
    cfg["empirical"] = ctx.flags.empirical;
    cfg["plot"] = ctx.flags.plot;
    if (ctx.flags.alpha) cfg["alpha"] = *ctx.flags.alpha;
    return json{{"tool", "sectoral"},         {"version", SECTORAL_VERSION}, {"command", command},
                {"spec_hash", spec_hash(ctx.spec)}, {"config", cfg},          {"partial", false}};
}

double lambda_star(const Context& ctx) { return validate_hypotheses(ctx.spec, ctx.config.box).lambda_star_estimate; }

Grid grid_for(const Context& ctx, std::vector<int> n_default) {
    std::vector<double> L = ctx.config.box;
    if (L.empty()) L = {default_halfwidth(ctx.spec, 0.0, 1.0, ctx.config.gamma)};
    std::vector<int> n = ctx.config.n.empty() ? n_default : ctx.config.n;
    const Grid g = make_grid(ctx.spec, L, n);
    return g;
}

std::vector<int> default_n(const OperatorSpec& s) { return {s.dimension == 1 ? 400 : 30}; }

AssembledOperator assemble(const Context& ctx, const Grid& g) {
    const Stencil st = stencil_from_string(ctx.flags.stencil);
    if (ctx.flags.kind == "P") return assemble_P(ctx.spec, g, st);
    if (ctx.flags.kind == "absV") return assemble_selfadjoint(ctx.spec, g, SelfAdjointVariant::absV, st);
    if (ctx.flags.kind == "weight") return assemble_selfadjoint(ctx.spec, g, SelfAdjointVariant::weight, st);
    throw ParameterError("--kind must be P, absV or weight");
}

Grid doubled(const Grid& g) {
    Grid h = g;
    for (auto& v : h.n) v *= 2;
    return h;
}

bool within_budget(const Grid& g) { return g.dof() <= dof_budget; }

int cmd_analyze(Context& ctx) {
    Manifest& man = ctx.manifest.emplace(ctx.out, manifest_header(ctx, "analyze"));
    AnalyzeOptions opt;
    opt.box = ctx.config.box;
    opt.p = ctx.config.p;
    opt.empirical = ctx.flags.empirical;
    opt.fov_angles = ctx.config.angles;
    const AnalysisReport rep = analyze(ctx.spec, opt);
    man.add("report.json", "report", rep.report.dump(2) + "\n");
    man.write();
    std::cout << "verdict: " << rep.report["verdict"].get<std::string>() << ", margin " << format_double(rep.verdict.margin)
              << "\n";
    return ok;
}

int cmd_spectrum(Context& ctx) {
    Manifest& man = ctx.manifest.emplace(ctx.out, manifest_header(ctx, "spectrum"));
    const Grid g = grid_for(ctx, default_n(ctx.spec));
    const AssembledOperator op = assemble(ctx, g);
    if (ctx.flags.save_matrix) man.add("matrix.secm", "matrix", secm_bytes(op));
    man.add("diagonal.csv", "diagonal", diagonal_csv(op));
    SpectrumResult res;
    try {
        res = eigenvalues(op);
    } catch (const EigNoConverge& e) {
        res.eigenvalues = e.partial();
        res.converged.assign(res.eigenvalues.size(), false);
        man.add("eigenvalues.csv", "eigenvalues", eigenvalues_csv(res));
        throw;
    }
    Grid coarse = g;
    for (auto& v : coarse.n) v = std::max(2, v / 2);
    mark_grid_convergence(res, eigenvalues(assemble(ctx, coarse)));
    man.add("eigenvalues.csv", "eigenvalues", eigenvalues_csv(res));
    man.add("summary.json", "summary",
            json{{"dof", g.dof()},
                 {"grid", {{"lower", g.lower}, {"upper", g.upper}, {"n", g.n}}},
                 {"kind", to_string(op.kind)},
                 {"backward_error_bound", res.backward_error_bound},
                 {"matrix_norm", res.matrix_norm}}
                    .dump(2) +
                "\n");
    if (ctx.flags.plot) {
        std::vector<complex_t> shown(res.eigenvalues.begin(),
                                     res.eigenvalues.begin() + static_cast<long>(std::min<std::size_t>(res.eigenvalues.size(), 60)));
        const auto b = padded_bounds(shown);
        SvgPlot plot(b[0], b[1], b[2], b[3], "eigenvalues (smallest 60 by modulus)");
        plot.points(shown, "#d62728", 3.0);
        man.add("eigenvalues.svg", "plot", plot.str());
    }
    man.write();
    if (!res.eigenvalues.empty())
        std::cout << "smallest eigenvalue: " << format_double(res.eigenvalues[0].real()) << " "
                  << format_double(res.eigenvalues[0].imag()) << "i\n";
    return ok;
}

int cmd_svd(Context& ctx) {
    Manifest& man = ctx.manifest.emplace(ctx.out, manifest_header(ctx, "svd"));
    const Grid g = grid_for(ctx, default_n(ctx.spec));
    const complex_t shift = ctx.config.shift.value_or(default_shift(lambda_star(ctx)));
    const auto mu = resolvent_singular_values(assemble(ctx, g).matrix, shift);
    man.add("singular_values.csv", "singular_values", singular_values_csv(mu));
    json summary{{"shift", complex_to_json(shift)}, {"dof", g.dof()}, {"convention", "resolvent, descending"}};
    if (mu.size() >= 100) {
        const Grid g2 = doubled(g);
        std::optional<std::vector<double>> mu2;
        if (within_budget(g2)) mu2 = resolvent_singular_values(assemble(ctx, g2).matrix, shift);
        const DecayFit f = decay_fit(mu, mu2 ? &*mu2 : nullptr);
        summary["fit"] = detail::fit_json(f);
        if (!mu2) summary["fit"]["note"] = "doubled grid exceeds the dof budget; convergence not assessed";
        std::cout << "p_estimate: " << format_double(f.p_estimate) << "\n";
    }
    man.add("summary.json", "summary", summary.dump(2) + "\n");
    if (ctx.flags.plot) {
        std::vector<complex_t> pts;
        for (std::size_t k = 0; k < mu.size(); ++k) pts.emplace_back(std::log10(k + 1.0), std::log10(mu[k]));
        const auto b = padded_bounds(pts);
        SvgPlot plot(b[0], b[1], b[2], b[3], "log10 mu_n against log10 n");
        plot.points(pts, "#1f77b4", 1.5);
        man.add("singular_values.svg", "plot", plot.str());
    }
    man.write();
    return ok;
}

int cmd_numrange(Context& ctx) {
    Manifest& man = ctx.manifest.emplace(ctx.out, manifest_header(ctx, "numrange"));
    const Grid g = grid_for(ctx, {ctx.spec.dimension == 1 ? 400 : 24});
    const AssembledOperator op = assemble(ctx, g);
    const double shift = std::max(0.0, lambda_star(ctx));
    double rotation = 0.0;
    if (ctx.spec.family_tag() == FamilyTag::dilated_model) rotation = -2.0 * ctx.spec.family->alpha;
    const FieldOfValues fov =
        field_of_values_boundary(shifted(op.matrix, complex_t{-shift, 0.0}), ctx.config.angles, {}, rotation);
    man.add("field_of_values.csv", "field_of_values", fov_csv(fov));
    Sector sec = fov.sector;
    sec.shift = shift;
    man.add("summary.json", "summary", json{{"sector", sector_to_json(sec)}, {"dof", g.dof()}}.dump(2) + "\n");
    if (ctx.flags.plot) {
        std::vector<complex_t> pts = fov.boundary_points;
        pts.emplace_back(0.0, 0.0);
        const auto b = padded_bounds(pts);
        SvgPlot plot(b[0], b[1], b[2], b[3], "field of values boundary");
        for (std::size_t i = 0; i < fov.boundary_points.size(); ++i)
            plot.segment(fov.boundary_points[i], fov.boundary_points[(i + 1) % fov.boundary_points.size()], "#1f77b4", 1.5);
        const double len = std::abs(complex_t(b[1] - b[0], b[3] - b[2]));
        plot.ray({}, sec.theta_min, len, "#999");
        plot.ray({}, sec.theta_max, len, "#999");
        man.add("field_of_values.svg", "plot", plot.str());
    }
    man.write();
    std::cout << "sector: [" << format_double(sec.theta_min) << ", " << format_double(sec.theta_max) << "]\n";
    return ok;
}

int cmd_pseudo(Context& ctx) {
    Manifest& man = ctx.manifest.emplace(ctx.out, manifest_header(ctx, "pseudo"));
    const Grid g = grid_for(ctx, {ctx.spec.dimension == 1 ? 200 : 16});
    const AssembledOperator op = assemble(ctx, g);
    std::vector<double> rect = ctx.config.rect;
    const SpectrumResult ev = eigenvalues(op);
    if (rect.empty()) {
        std::vector<complex_t> low(ev.eigenvalues.begin(),
                                   ev.eigenvalues.begin() + static_cast<long>(std::min<std::size_t>(ev.eigenvalues.size(), 20)));
        low.emplace_back(0.0, 0.0);
        const auto b = padded_bounds(low);
        rect = {b[0], b[1], b[2], b[3]};
    }
    const std::vector<int> res = ctx.config.res.empty() ? std::vector<int>{60, 60} : ctx.config.res;
    const PseudospectrumGrid ps = pseudospectrum(op.matrix, rect[0], rect[1], rect[2], rect[3], res[0], res[1]);
    man.add("pseudospectrum.csv", "pseudospectrum", pseudospectrum_csv(ps));
    if (ctx.flags.plot) {
        SvgPlot plot(rect[0], rect[1], rect[2], rect[3], "log10 sigma_min(M - z)");
        plot.contours(ps, {-8, -6, -4, -3, -2, -1, 0});
        std::vector<complex_t> inside;
        for (complex_t z : ev.eigenvalues)
            if (z.real() >= rect[0] && z.real() <= rect[1] && z.imag() >= rect[2] && z.imag() <= rect[3]) inside.push_back(z);
        plot.points(inside, "black", 2.0);
        man.add("pseudospectrum.svg", "plot", plot.str());
    }
    man.write();
    return ok;
}

int cmd_dilate(Context& ctx) {
    if (ctx.spec.family_tag() != FamilyTag::dilated_model) throw ParameterError("dilate needs a dilated_model spec");
    const double alpha = ctx.flags.alpha.value_or(optimal_alpha(ctx.spec.family->m, ctx.spec.family->k) - ctx.spec.family->alpha);
    const OperatorSpec out = dilate(ctx.spec, alpha);
    Manifest& man = ctx.manifest.emplace(ctx.out, manifest_header(ctx, "dilate"));
    const Sector sec = analytic_sector(out);
    man.add("spec.json", "spec", spec_to_json(out).dump(2) + "\n");
    man.add("summary.json", "summary",
            json{{"alpha", alpha},
                 {"total_alpha", out.family->alpha},
                 {"angles", out.angles},
                 {"spec_hash", spec_hash(out)},
                 {"sector", sector_to_json(sec)}}
                    .dump(2) +
                "\n");
    man.write();
    std::cout << "dilated by " << format_double(alpha) << ", sector opening " << format_double(sec.opening()) << "\n";
    return ok;
}

int cmd_verify(const Flags& f) {
    SuiteOptions opt;
    if (f.seed) opt.seed = *f.seed;
    opt.on_result = [](const CriterionResult& c) { std::cout << summary_line(c) << std::endl; };
    VerifyArtifacts art;
    const SuiteRun run = run_acceptance(opt, &art);
    const fs::path out = f.out;
    fs::create_directories(out);
    write_text(out / "report.json", art.report);
    write_text(out / "junit.xml", art.junit);
    write_text(out / "manifest.json", art.manifest);
    return run.passed() ? ok : acceptance_failure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sectorial analysis of non-self-adjoint magnetic Schrodinger operators"};
    app.set_version_flag("--version", SECTORAL_VERSION);
    app.require_subcommand(1);
    Flags f;

    auto add_common = [&](CLI::App* sub, bool needs_spec) {
        auto* opt = sub->add_option("--spec", f.spec_path, "operator spec JSON");
        if (needs_spec) opt->required()->check(CLI::ExistingFile);
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--box", f.box, "box halfwidth L (or L1,L2)");
        sub->add_option("--n", f.n, "interior points per axis (N or N1,N2)");
        sub->add_option("--shift", f.shift, "resolvent shift re,im");
        sub->add_option("--p", f.p, "probe exponent");
        sub->add_option("--angles", f.angles, "field-of-values directions (>= 64)");
        sub->add_option("--seed", f.seed, "random seed");
        sub->add_option("--gamma", f.gamma, "form shift gamma");
        sub->add_option("--rect", f.rect, "pseudospectrum rectangle re_min,re_max,im_min,im_max");
        sub->add_option("--res", f.res, "pseudospectrum resolution nx,ny (<= 200)");
        sub->add_option("--stencil", f.stencil, "magnetic stencil: expanded or peierls");
        sub->add_option("--kind", f.kind, "operator: P, absV or weight");
        sub->add_flag("--plot", f.plot, "also write SVG plots");
        sub->add_flag("--empirical", f.empirical, "analyze: add a discretized field-of-values sector");
        sub->add_flag("--save-matrix", f.save_matrix, "spectrum: also write the matrix as SECM");
    };
    const std::vector<std::pair<std::string, std::string>> commands{
        {"analyze", "threshold, sector and completeness verdict"},
        {"spectrum", "eigenvalues of the discretized operator"},
        {"svd", "resolvent singular values and decay fit"},
        {"numrange", "field-of-values boundary and sector"},
        {"pseudo", "pseudospectrum on a rectangle"},
        {"dilate", "analytic dilation of a dilated_model spec"},
        {"verify", "run the acceptance suite"}};
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        subs[name] = app.add_subcommand(name, help);
        add_common(subs[name], name != "verify");
    }
    subs["dilate"]->add_option("--alpha", f.alpha, "dilation angle (default: to the optimal angle)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return spec_error;
    }

    Context ctx;
    try {
        if (subs["verify"]->parsed()) return cmd_verify(f);
        LoadedSpec loaded = load_spec_file(f.spec_path);
        ctx.spec = loaded.spec;
        ctx.flags = f;
        ctx.config = resolve(f, loaded.config);
        stencil_from_string(f.stencil);
        ctx.out = f.out;
        fs::create_directories(ctx.out);
        if (subs["analyze"]->parsed()) return cmd_analyze(ctx);
        if (subs["spectrum"]->parsed()) return cmd_spectrum(ctx);
        if (subs["svd"]->parsed()) return cmd_svd(ctx);
        if (subs["numrange"]->parsed()) return cmd_numrange(ctx);
        if (subs["pseudo"]->parsed()) return cmd_pseudo(ctx);
        if (subs["dilate"]->parsed()) return cmd_dilate(ctx);
    } catch (const SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return spec_error;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        if (ctx.manifest) {
            ctx.manifest->mark_partial(e.what());
            ctx.manifest->write();
        }
        return numeric_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return numeric_error;
    }
    return ok;
}
