#include "mqsbt/io/pipeline.hpp"

#include "mqsbt/analysis/frequency.hpp"
#include "mqsbt/analysis/oracle.hpp"
#include "mqsbt/analysis/passivity.hpp"
#include "mqsbt/analysis/simulate.hpp"
#include "mqsbt/bt/adi.hpp"
#include "mqsbt/bt/shifts.hpp"
#include "mqsbt/bt/truncation.hpp"
#include "mqsbt/errors.hpp"
#include "mqsbt/fem/assembly.hpp"
#include "mqsbt/la/matrix_market.hpp"
#include "mqsbt/la/sparse.hpp"
#include "mqsbt/mesh/incidence.hpp"
#include "mqsbt/mesh/mesh.hpp"
#include "mqsbt/ops/context.hpp"
#include "mqsbt/reg/kernels.hpp"
#include "mqsbt/reg/regularized.hpp"
#include "mqsbt/version.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace mqsbt::io {

namespace {

constexpr Stage kOrder[] = {Stage::Mesh,     Stage::Assemble, Stage::Regularize, Stage::Reduce,
                            Stage::FreqResp, Stage::Simulate, Stage::Verify};

// Config sections each stage depends on.
std::vector<std::string> sections(Stage s) {
    switch (s) {
        case Stage::Mesh: return {"geometry."};
        case Stage::Assemble:
        case Stage::Regularize: return {"geometry.", "material.", "winding."};
        case Stage::Reduce: return {"geometry.", "material.", "winding.", "mor."};
        case Stage::FreqResp:
        case Stage::Simulate: return {"geometry.", "material.", "winding.", "mor.", "analysis."};
        case Stage::Verify: return {"geometry.", "material.", "winding.", "mor.", "analysis.", "oracle."};
        case Stage::All: break;
    }
    return {};
}

std::vector<Stage> prerequisites(Stage s) {
    switch (s) {
        case Stage::Mesh: return {};
        case Stage::Assemble: return {Stage::Mesh};
        case Stage::Regularize: return {Stage::Assemble};
        case Stage::Reduce: return {Stage::Regularize};
        case Stage::FreqResp:
        case Stage::Simulate: return {Stage::Reduce};
        case Stage::Verify: return {Stage::Reduce};
        case Stage::All: break;
    }
    return {};
}

// FNV-1a over the echo lines of the relevant sections.
std::string config_hash(const RunConfig& cfg, Stage s) {
    std::uint64_t h = 1469598103934665603ull;
    std::istringstream in(cfg.echo());
    std::string line;
    const auto secs = sections(s);
    while (std::getline(in, line)) {
        bool keep = false;
        for (const auto& p : secs) keep = keep || line.compare(0, p.size(), p) == 0;
        if (!keep) continue;
        for (unsigned char c : line + "\n") {
            h ^= c;
            h *= 1099511628211ull;
        }
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string pass_fail(bool ok) { return ok ? "pass" : "fail"; }

class Pipeline {
public:
    Pipeline(const RunConfig& cfg, const PipelineOptions& opt)
        : cfg_(cfg), dir_(opt.out_dir.empty() ? cfg.output_dir : opt.out_dir), seed_(opt.seed), log_(opt.log) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_))
            throw ValidationError("output directory '" + dir_.string() + "' cannot be created");
        const fs::path probe = dir_ / ".write_probe";
        {
            std::ofstream p(probe);
            if (!p) throw ValidationError("output directory '" + dir_.string() + "' is not writable");
        }
        fs::remove(probe, ec);
        if (fs::exists(manifest_path())) {
            try {
                man_ = Manifest::load(manifest_path().string());
            } catch (const ValidationError&) {
                man_ = Manifest();
            }
        }
        man_.set("tool.version", std::string(kVersion));
        man_.erase_prefix("config.");
        std::istringstream in(cfg_.echo());
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find(" = ");
            man_.set("config." + line.substr(0, eq), line.substr(eq + 3));
        }
    }

    void run(Stage s) {
        if (s == Stage::All) {
            for (Stage t : kOrder) execute(t);
            return;
        }
        for (Stage p : prerequisites(s)) ensure(p);
        execute(s);
    }

    const Manifest& manifest() const { return man_; }

private:
    fs::path manifest_path() const { return dir_ / "manifest.txt"; }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void info(const std::string& msg) {
        if (log_) *log_ << "[" << current_ << "] " << msg << std::endl;
    }

    bool fresh(Stage s) const {
        const std::string key = std::string("stage.") + stage_name(s);
        if (!man_.has(key + ".config_hash") || man_.get(key + ".config_hash") != config_hash(cfg_, s)) return false;
        if (!man_.has("artifacts." + std::string(stage_name(s)))) return false;
        std::istringstream in(man_.get("artifacts." + std::string(stage_name(s))));
        std::string f;
        while (in >> f)
            if (!fs::exists(dir_ / f)) return false;
        return true;
    }

    // Returns true when s was (re)built during this run.
    bool ensure(Stage s) {
        bool upstream = false;
        for (Stage p : prerequisites(s)) upstream = ensure(p) || upstream;
        if (done_.count(s)) return true;
        if (!upstream && fresh(s)) return false;
        execute(s);
        return true;
    }

    void execute(Stage s) {
        current_ = stage_name(s);
        const auto t0 = std::chrono::steady_clock::now();
        artifacts_.clear();
        info("start");
        switch (s) {
            case Stage::Mesh: stage_mesh(); break;
            case Stage::Assemble: stage_assemble(); break;
            case Stage::Regularize: stage_regularize(); break;
            case Stage::Reduce: stage_reduce(); break;
            case Stage::FreqResp: stage_freqresp(); break;
            case Stage::Simulate: stage_simulate(); break;
            case Stage::Verify: stage_verify(); break;
            case Stage::All: break;
        }
        const double dt = seconds_since(t0);
        std::string list;
        for (const auto& a : artifacts_) list += (list.empty() ? "" : " ") + a;
        man_.set("artifacts." + current_, list);
        man_.set("timing." + current_ + "_seconds", dt);
        man_.set("stage." + current_ + ".config_hash", config_hash(cfg_, s));
        man_.save(manifest_path().string());
        done_.insert(s);
        char buf[64];
        std::snprintf(buf, sizeof buf, "done in %.2f s", dt);
        info(buf);
    }

    void artifact(const std::string& name) { artifacts_.push_back(name); }

    void write_sparse(const std::string& name, const la::SparseMatrix& A) {
        la::write_matrix_market(path(name), A);
        artifact(name);
    }
    void write_dense(const std::string& name, const la::DenseMatrix& A) {
        la::write_matrix_market(path(name), A);
        artifact(name);
    }
    void write_text(const std::string& name, const Manifest& kv) {
        kv.save(path(name));
        artifact(name);
    }

    // ---- loaders -------------------------------------------------------

    std::shared_ptr<const mesh::Mesh> load_mesh() {
        if (!mesh_) mesh_ = std::make_shared<mesh::Mesh>(mesh::read_mesh(path("mesh.txt")));
        return mesh_;
    }

    std::shared_ptr<const fem::AssembledSystem> load_system() {
        if (sys_) return sys_;
        const Manifest s = Manifest::load(path("system.txt"));
        sys_ = std::make_shared<fem::AssembledSystem>(fem::assemble_from_blocks(
            la::read_matrix_market(path("C.mtx")), la::read_matrix_market(path("M.mtx")),
            la::read_matrix_market(path("M_nu.mtx")), la::read_matrix_market(path("Upsilon.mtx")),
            la::read_matrix_market_dense(path("R.mtx")), static_cast<int>(s.get_long("n1"))));
        return sys_;
    }

    mesh::IncidenceSet load_incidence() {
        const auto sys = load_system();
        mesh::IncidenceSet inc;
        inc.C = sys->C;
        inc.G0 = la::read_matrix_market(path("G.mtx"));
        inc.n1 = sys->n1;
        inc.eliminated = true;
        inc.edge_ids.resize(inc.C.cols());
        std::iota(inc.edge_ids.begin(), inc.edge_ids.end(), 0);
        inc.node_ids.resize(inc.G0.cols());
        std::iota(inc.node_ids.begin(), inc.node_ids.end(), 0);
        inc.face_ids.resize(inc.C.rows());
        std::iota(inc.face_ids.begin(), inc.face_ids.end(), 0);
        return inc;
    }

    std::shared_ptr<const reg::RegularizedSystem> load_regularized() {
        if (rs_) return rs_;
        const auto sys = load_system();
        const Manifest r = Manifest::load(path("regularization.txt"));
        reg::KernelBases kb;
        kb.Y = la::read_matrix_market(path("Y.mtx"));
        kb.Yhat = la::read_matrix_market(path("Yhat.mtx"));
        kb.n2 = sys->n2;
        kb.k2 = static_cast<int>(kb.Y.cols());
        kb.num_nodes = static_cast<int>(r.get_long("interior_nodes"));
        kb.provenance = r.get("provenance") == "graph" ? reg::Provenance::Graph : reg::Provenance::Fallback;
        rs_ = std::make_shared<reg::RegularizedSystem>(sys, std::move(kb));
        return rs_;
    }

    const ops::OperatorContext& context() {
        if (!ctx_) ctx_ = std::make_unique<ops::OperatorContext>(load_regularized());
        return *ctx_;
    }

    std::shared_ptr<const bt::ReducedModel> load_model() {
        if (!model_) model_ = std::make_shared<bt::ReducedModel>(bt::read_reduced_model(path("reduced")));
        return model_;
    }

    // ---- stages --------------------------------------------------------

    void stage_mesh() {
        mesh_.reset();
        sys_.reset();
        rs_.reset();
        ctx_.reset();
        model_.reset();
        auto m = std::make_shared<mesh::Mesh>(mesh::generate_mesh(cfg_.geometry));
        mesh::write_mesh(path("mesh.txt"), *m);
        artifact("mesh.txt");
        const mesh::IncidenceSet full = mesh::build_incidence(*m);
        write_sparse("incidence_C.mtx", full.C);
        write_sparse("incidence_G0.mtx", full.G0);
        la::SparseMatrix CG = full.C * full.G0;
        CG.prune(0.0);
        const bool cg_ok = CG.nonZeros() == 0;
        info(std::string("C G0 = 0 check: ") + pass_fail(cg_ok) + " (" + std::to_string(CG.nonZeros()) +
             " nonzeros in the product)");
        if (!cg_ok) throw NumericalError("mesh: C G0 is not zero");
        man_.set("checks.CG0", pass_fail(cg_ok));
        man_.set("dims.n_n", m->num_nodes());
        man_.set("dims.n_e", m->num_edges());
        man_.set("dims.n_f", m->num_faces());
        man_.set("dims.n_t", m->num_tets());
        mesh_ = m;
    }

    void stage_assemble() {
        sys_.reset();
        rs_.reset();
        ctx_.reset();
        model_.reset();
        const auto m = load_mesh();
        const mesh::IncidenceSet inc = mesh::eliminate_boundary(mesh::build_incidence(*m), *m);
        auto sys = std::make_shared<fem::AssembledSystem>(fem::build_system(*m, inc, cfg_.material, cfg_.windings()));
        write_sparse("C.mtx", sys->C);
        write_sparse("G.mtx", inc.G0);
        write_sparse("M.mtx", sys->M);
        write_sparse("M_nu.mtx", sys->M_nu);
        write_sparse("Upsilon.mtx", sys->Upsilon);
        write_sparse("K.mtx", sys->K);
        write_sparse("X.mtx", sys->X);
        write_dense("R.mtx", sys->R);
        int iron = 0, coil = 0, air = 0;
        for (auto r : m->regions) (r == mesh::Region::Iron ? iron : r == mesh::Region::Coil ? coil : air)++;
        Manifest s;
        s.set("n_nodes_interior", static_cast<long>(inc.G0.cols()));
        s.set("n_edges_interior", static_cast<long>(inc.num_edges()));
        s.set("n_faces", static_cast<long>(inc.C.rows()));
        s.set("n1", sys->n1);
        s.set("n2", sys->n2);
        s.set("m", sys->m);
        s.set("tets_iron", iron);
        s.set("tets_coil", coil);
        s.set("tets_air", air);
        s.set("sigma_iron", cfg_.material.sigma1);
        s.set("nu_iron", cfg_.material.nu_iron);
        s.set("nu_air", cfg_.material.nu_air);
        s.set("R", cfg_.material.R(0, 0));
        s.set("winding.turns", cfg_.turns);
        s.set("winding.area", cfg_.area);
        s.set("X1_norm", sys->X1_norm);
        write_text("system.txt", s);
        info("n1 = " + std::to_string(sys->n1) + ", n2 = " + std::to_string(sys->n2) + ", m = " +
             std::to_string(sys->m));
        man_.set("dims.n_n_int", static_cast<long>(inc.G0.cols()));
        man_.set("dims.n_e_int", static_cast<long>(inc.num_edges()));
        man_.set("dims.n1", sys->n1);
        man_.set("dims.n2", sys->n2);
        man_.set("dims.m", sys->m);
        sys_ = sys;
    }

    void stage_regularize() {
        rs_.reset();
        ctx_.reset();
        model_.reset();
        const auto sys = load_system();
        const mesh::IncidenceSet inc = load_incidence();
        reg::KernelBases kb = reg::kernel_bases(inc);
        const reg::ReducedGradient rg = reg::reduced_gradient(inc);
        const reg::KernelCheck kc = reg::check_kernel_bases(kb, sys->C2, &rg.G2);
        info("kernel bases (" + std::string(reg::provenance_name(kb.provenance)) + "): " + kc.detail);
        if (!kc.ok) throw NumericalError("regularize: kernel basis check failed: " + kc.detail);
        const reg::Theorem1Report t1 = reg::theorem1_check(*sys, kb, false);
        info("common kernel of E and K: " + t1.summary());
        write_sparse("Y.mtx", kb.Y);
        write_sparse("Yhat.mtx", kb.Yhat);
        const int n_int = kb.num_nodes;
        rs_ = std::make_shared<reg::RegularizedSystem>(sys, std::move(kb));
        const auto& rs = *rs_;
        write_sparse("YtK22Y.mtx", rs.YtK22Y());
        write_sparse("YtX2.mtx", rs.YtX2());
        write_dense("Br.mtx", rs.Br());

        const int nr = rs.nr(), k2 = rs.k2(), m = rs.m();
        const int ninf = rs.n2() - k2 - m;
        const int n0 = cfg_.mor.n0 >= 0 ? cfg_.mor.n0 : n_int - k2;
        const int ns = nr - n0 - ninf;
        if (ninf < 0 || n0 < 0 || ns < 1)
            throw NumericalError("regularize: inconsistent dimensions n_r = " + std::to_string(nr) + ", n0 = " +
                                 std::to_string(n0) + ", n_inf = " + std::to_string(ninf));
        Manifest r;
        r.set("provenance", std::string(reg::provenance_name(rs.bases().provenance)));
        r.set("interior_nodes", n_int);
        r.set("k2", k2);
        r.set("n_r", nr);
        r.set("n0", n0);
        r.set("n0_source", std::string(cfg_.mor.n0 >= 0 ? "config" : "interior nodes minus k2"));
        r.set("n_inf", ninf);
        r.set("n_s", ns);
        r.set("kernel_check", pass_fail(kc.ok));
        r.set("kernel_check.detail", kc.detail);
        r.set("theorem1.E_residual", t1.E_residual);
        r.set("theorem1.K_residual", t1.K_residual);
        r.set("theorem1.exact", std::string(t1.exact ? "true" : "false"));
        r.set("theorem1", pass_fail(t1.pass));
        write_text("regularization.txt", r);

        man_.set("dims.k2", k2);
        man_.set("dims.n_r", nr);
        man_.set("dims.n0", n0);
        man_.set("dims.n_inf", ninf);
        man_.set("dims.n_s", ns);
        const bool id1 = nr == rs.n1() + rs.n2() - k2;
        const bool id2 = ns + n0 + ninf == nr;
        man_.set("identity.n_r = n1 + n2 - k2", pass_fail(id1));
        man_.set("identity.n_s + n0 + n_inf = n_r", pass_fail(id2));
        man_.set("checks.theorem1_factored", pass_fail(t1.pass));
        if (!id1 || !id2) throw NumericalError("regularize: dimension identities violated");
        info("n_r = " + std::to_string(nr) + ", k2 = " + std::to_string(k2) + ", n_s = " + std::to_string(ns) +
             ", n0 = " + std::to_string(n0) + ", n_inf = " + std::to_string(ninf));
    }

    void stage_reduce() {
        model_.reset();
        const auto& ctx = context();
        const ops::SpectralBounds sb = ops::spectral_bounds(ctx);
        info("spectral bounds a = " + format_double(sb.a) + ", b = " + format_double(sb.b));
        bt::ShiftSet shifts;
        if (cfg_.mor.shift_method == bt::ShiftMethod::Logspace)
            shifts = bt::logspace_shifts(sb.a, sb.b, cfg_.mor.shift_count);
        else if (cfg_.mor.shift_count > 0)
            shifts = bt::wachspress_shifts(sb.a, sb.b, cfg_.mor.shift_count);
        else
            shifts = bt::wachspress_shifts(sb.a, sb.b, cfg_.mor.eps_shift);
        Manifest sh;
        sh.set("method", std::string(bt::shift_method_name(shifts.method)));
        sh.set("a", shifts.a);
        sh.set("b", shifts.b);
        sh.set("rho", shifts.rho);
        sh.set("count", static_cast<long>(shifts.shifts.size()));
        for (std::size_t j = 0; j < shifts.shifts.size(); ++j) sh.set("tau." + std::to_string(j + 1), shifts.shifts[j]);
        write_text("shifts.txt", sh);
        info(std::to_string(shifts.shifts.size()) + " " + bt::shift_method_name(shifts.method) +
             " shifts, rho = " + format_double(shifts.rho));

        bt::AdiOptions ao;
        ao.tol = cfg_.mor.tol_adi;
        ao.maxit = cfg_.mor.maxit;
        const bt::LowRankFactor Z = bt::lr_adi(ctx, shifts, ao);
        bt::write_residual_history(path("residuals.csv"), Z);
        artifact("residuals.csv");
        write_dense("Zc.mtx", Z.Z);
        info(std::string("LR-ADI ") + bt::adi_status_name(Z.status) + " after " + std::to_string(Z.iterations) +
             " steps, residual " + format_double(Z.residuals.back()));
        if (Z.status == bt::AdiStatus::Stagnated) info("warning: " + Z.message);

        bt::TruncationOptions to;
        to.ell = cfg_.mor.ell;
        to.tol = cfg_.mor.tol_hsv;
        to.ns = static_cast<int>(man_.get_long("dims.n_s"));
        auto model = std::make_shared<bt::ReducedModel>(bt::balanced_truncate(ctx, Z, to));
        fs::create_directories(dir_ / "reduced");
        bt::write_reduced_model(path("reduced"), *model);
        for (const char* f : {"reduced/reduced_model.txt", "reduced/A.mtx", "reduced/B.mtx", "reduced/C.mtx",
                              "reduced/Rinv.mtx"})
            artifact(f);
        info("order " + std::to_string(model->ell) + " of n_c = " + std::to_string(model->nc) + ", error bound " +
             format_double(model->error_bound) + ", H-infinity error " + format_double(model->hinf_error) +
             ", certified bound " + format_double(model->certified_bound));
        man_.set("results.spectral_a", sb.a);
        man_.set("results.spectral_b", sb.b);
        man_.set("results.shift_count", static_cast<long>(shifts.shifts.size()));
        man_.set("results.adi_status", std::string(bt::adi_status_name(Z.status)));
        man_.set("results.adi_residual", Z.residuals.back());
        man_.set("dims.n_c", model->nc);
        man_.set("dims.ell", model->ell);
        man_.set("results.error_bound", model->error_bound);
        man_.set("results.hinf_error", model->hinf_error);
        man_.set("results.hankel_deficit", model->hankel_deficit);
        man_.set("results.certified_bound", model->certified_bound);
        man_.set("results.bound_met", std::string(model->bound_met ? "true" : "false"));
        model_ = model;
    }

    void stage_freqresp() {
        const auto& ctx = context();
        const auto model = load_model();
        const auto omega = analysis::log_grid(cfg_.analysis.omega_min, cfg_.analysis.omega_max,
                                              cfg_.analysis.omega_points);
        const analysis::FrequencyResponse fr = analysis::frequency_sweep(&ctx, model.get(), omega);
        analysis::write_frequency_csv(path("frequency.csv"), fr);
        artifact("frequency.csv");
        double emax = 0.0;
        for (double e : fr.error) emax = std::max(emax, e);
        info("max sampled error " + format_double(emax) + ", at omega_min " + format_double(fr.error.front()) +
             ", H-infinity error " + format_double(model->hinf_error));
        man_.set("results.freq_max_error", emax);
        man_.set("results.freq_error_at_omega_min", fr.error.front());
    }

    void stage_simulate() {
        const auto& ctx = context();
        const auto model = load_model();
        const auto u = analysis::sine_input(ctx.m(), cfg_.analysis.amplitude, cfg_.analysis.frequency);
        const auto full = analysis::simulate_full(ctx, u, cfg_.analysis.t_final, cfg_.analysis.steps);
        const auto red = analysis::simulate_reduced(*model, u, cfg_.analysis.t_final, cfg_.analysis.steps);
        const analysis::SimulationResult r = analysis::compare(full, red);
        analysis::write_simulation_csv(path("simulation.csv"), r);
        artifact("simulation.csv");
        info("max relative output error " + format_double(r.max_relerr));
        man_.set("results.sim_max_relerr", r.max_relerr);
    }

    void stage_verify() {
        const auto rsp = load_regularized();
        const auto& rs = *rsp;
        const auto& ctx = context();
        std::ostringstream rep;
        int failures = 0;
        auto line = [&](const std::string& name, bool ok, const std::string& detail) {
            rep << name << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << "\n";
            man_.set("checks." + name, pass_fail(ok));
            info(name + ": " + (ok ? "PASS" : "FAIL") + "  " + detail);
            if (!ok) ++failures;
        };
        auto skip = [&](const std::string& name, const std::string& why) {
            rep << name << ": SKIPPED  " << why << "\n";
            man_.set("checks." + name, std::string("skipped"));
            info(name + ": skipped, " + why);
        };

        const int ne = rs.n1() + rs.n2();
        const bool dense_t1 = ne <= cfg_.oracle_cap;
        const reg::Theorem1Report t1 = reg::theorem1_check(rs.sys(), rs.bases(), dense_t1);
        line("theorem1", t1.pass, t1.summary());

        const long ns = man_.get_long("dims.n_s"), n0 = man_.get_long("dims.n0"), ninf = man_.get_long("dims.n_inf");
        if (rs.nr() <= cfg_.oracle_cap) {
            analysis::OracleOptions oo;
            oo.cap = cfg_.oracle_cap;
            const analysis::DenseOracle o = analysis::build_dense_oracle(rs, oo);
            const analysis::PencilSpectrum ps = analysis::pencil_spectrum(o);
            std::ostringstream d;
            d << "n_s=" << ps.nfinite << " n0=" << ps.nzero << " n_inf=" << ps.ninf
              << " max_finite=" << format_double(ps.max_finite) << " max_imag=" << format_double(ps.max_imag)
              << " block_residual=" << format_double(o.block_residual) << " (expected n_s=" << ns << " n0=" << n0
              << " n_inf=" << ninf << ")";
            const bool t2 = ps.max_imag <= 1e-8 && ps.max_finite < 0.0 && ps.ninf == ninf && ps.nzero == n0 &&
                            ps.nfinite == ns && o.ninf == ps.ninf && o.n0 == ps.nzero && o.ns == ps.nfinite &&
                            o.block_residual <= 1e-10 && o.E11_spd && o.A11_nsd;
            line("theorem2", t2, d.str());

            const la::DenseMatrix BEB = o.B.transpose() * o.Einv * o.B;
            const double e3 = (BEB - rs.Rinv()).norm() / rs.Rinv().norm();
            const double r1 = (o.mulE(o.mulE(o.Einv).transpose()) - o.E).norm() / o.E.norm();
            const double r2 = (o.Einv * o.mulE(o.Einv) - o.Einv).norm() / o.Einv.norm();
            std::ostringstream d3;
            d3 << "B^T E^- B vs R^-1 " << format_double(e3) << ", E E^- E - E " << format_double(r1)
               << ", E^- E E^- - E^- " << format_double(r2);
            line("identities", e3 <= 1e-10 && r1 <= 1e-9 && r2 <= 1e-9, d3.str());

            const analysis::Gramians g = analysis::dense_gramians(o);
            const double t4 = analysis::gramian_identity_residual(o, g);
            line("theorem4", t4 <= 1e-8, "||E Go E - A Gc A|| / ||A Gc A|| = " + format_double(t4));
        } else {
            skip("theorem2", "n_r exceeds oracle.cap");
            skip("identities", "n_r exceeds oracle.cap");
            skip("theorem4", "n_r exceeds oracle.cap");
        }

        const auto model = load_model();
        std::ostringstream d8;
        d8 << "H-infinity error " << format_double(model->hinf_error) << " <= certified bound "
           << format_double(model->certified_bound) << " (error_bound " << format_double(model->error_bound)
           << " + 2 x Hankel deficit " << format_double(model->hankel_deficit) << "), error_bound - hinf_error = "
           << format_double(model->error_bound - model->hinf_error);
        line("certified_bound", model->hinf_error <= model->certified_bound, d8.str());

        const analysis::PassivityReport pr = analysis::passivity_scan(
            [&](la::Complex s) { return analysis::transfer_full(ctx, s); }, cfg_.analysis.passivity_samples, seed_);
        std::ostringstream d9;
        d9 << pr.samples << " samples, min lambda(H + H^*) / ||H|| = " << format_double(pr.min_margin) << " at s = ("
           << format_double(pr.worst_s.real()) << ", " << format_double(pr.worst_s.imag()) << ")";
        line("theorem3", pr.pass, d9.str());

        std::ofstream out(path("verify.txt"), std::ios::binary);
        out << rep.str();
        if (!out) throw ValidationError("cannot write verify.txt");
        artifact("verify.txt");
        if (failures > 0) {
            man_.save(manifest_path().string());
            throw NumericalError("verify: " + std::to_string(failures) + " check(s) failed, see verify.txt");
        }
    }

    RunConfig cfg_;
    fs::path dir_;
    std::uint64_t seed_;
    std::ostream* log_;
    Manifest man_;
    std::string current_;
    std::vector<std::string> artifacts_;
    std::set<Stage> done_;

    std::shared_ptr<const mesh::Mesh> mesh_;
    std::shared_ptr<const fem::AssembledSystem> sys_;
    std::shared_ptr<const reg::RegularizedSystem> rs_;
    std::unique_ptr<ops::OperatorContext> ctx_;
    std::shared_ptr<const bt::ReducedModel> model_;
};

}  // namespace

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::Mesh: return "mesh";
        case Stage::Assemble: return "assemble";
        case Stage::Regularize: return "regularize";
        case Stage::Reduce: return "reduce";
        case Stage::FreqResp: return "freqresp";
        case Stage::Simulate: return "simulate";
        case Stage::Verify: return "verify";
        case Stage::All: return "all";
    }
    return "?";
}

std::vector<std::string> stage_names() {
    std::vector<std::string> out;
    for (Stage s : kOrder) out.push_back(stage_name(s));
    out.push_back("all");
    return out;
}

Stage parse_stage(const std::string& name) {
    for (Stage s : kOrder)
        if (name == stage_name(s)) return s;
    if (name == "all") return Stage::All;
    throw ValidationError("unknown stage '" + name + "'");
}

Manifest run_pipeline(const RunConfig& cfg, Stage stage, const PipelineOptions& opt) {
    validate(cfg);
    Pipeline p(cfg, opt);
    p.run(stage);
    return p.manifest();
}

}  // namespace mqsbt::io
