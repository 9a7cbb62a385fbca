"""Batch front door: subcommand-per-stage pipeline emitting plot-ready CSV/JSON.

Exit codes: 0 ok, 1 stage failure, 2 config or input error. All artifacts
land under --out together with a manifest listing their content hashes.
"""

import argparse
import dataclasses
import sys
import traceback
from pathlib import Path

import numpy as np

from . import dynamics as dyn
from . import impact as imp
from . import io as pio
from . import mixture as mix
from .distributions import (
    Family,
    FitError,
    VOLUME_FAMILIES,
    fit_mle,
    normality_tests,
)
from .loess import LoessConfig
from .segmentation import KssConfig, Segmentation, segment_series
from .series import TradingCalendar, magnitude, normalize_volume, price_to_returns
from .synth import SynthSpec, generate_coupled, generate_returns, generate_volume

STAGES = ("segment", "fit", "mixture", "dynamics", "impact", "report")


class ConfigError(ValueError):
    """Bad configuration or input; maps to exit code 2."""


class StageError(RuntimeError):
    """A pipeline stage failed; maps to exit code 1."""


def density_grid(lo, hi, n=200):
    """Default log-spaced evaluation grid for density curves."""
    return np.geomspace(lo, hi, n)


def _edf_rows(lengths):
    lens = np.sort(np.asarray(lengths, dtype=float))
    n = lens.size
    ccdf = 1.0 - np.arange(1, n + 1) / n
    return [(float(l), float(c)) for l, c in zip(lens, ccdf)]


class Pipeline:
    """Holds loaded inputs and lazily computed stage products."""

    def __init__(self, csv_path, out_dir, kss_config, loess_config, seed, calendar):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.kss_config = kss_config
        self.loess_config = loess_config
        self.seed = seed
        try:
            self.prices, raw_volume = pio.read_price_volume_csv(csv_path, calendar)
        except FileNotFoundError:
            raise ConfigError(f"input file not found: {csv_path}") from None
        except pio.CsvFormatError as exc:
            raise ConfigError(f"{csv_path}: {exc}") from exc
        self.volume = normalize_volume(raw_volume)
        self.returns = price_to_returns(self.prices, cross_session=False)
        self.rmag = magnitude(self.returns)
        self._products = {}
        self.written = []

    # -- artifact helpers -------------------------------------------------

    def _write_table(self, name, header, rows):
        path = self.out / name
        pio.write_table(path, header, rows)
        self.written.append(name)

    def _write_json(self, name, obj):
        path = self.out / name
        pio.write_json(path, obj)
        self.written.append(name)

    # -- stages ------------------------------------------------------------

    def ensure(self, product):
        if product not in self._products:
            stage = {
                "volume_seg": self.stage_segment,
                "rmag_seg": self.stage_segment,
                "volume_fits": self.stage_fit,
                "return_variances": self.stage_fit,
                "mixture_model": self.stage_mixture,
                "sigma_curves": self.stage_mixture,
            }[product]
            stage()
        return self._products[product]

    def stage_segment(self):
        vol_seg = segment_series(self.volume.values, self.kss_config)
        self._products["volume_seg"] = vol_seg
        self._write_table(
            "volume_segments.csv",
            ("start", "end", "length", "mean", "variance"),
            vol_seg.to_rows(),
        )
        self._write_json("volume_segments.json", vol_seg.to_dict())
        self._write_table("volume_length_edf.csv", ("length", "ccdf"),
                          _edf_rows(vol_seg.lengths))
        rmag_seg = segment_series(self.rmag.values, self.kss_config)
        self._products["rmag_seg"] = rmag_seg
        self._write_table(
            "rmag_segments.csv",
            ("start", "end", "length", "mean", "variance"),
            rmag_seg.to_rows(),
        )
        self._write_json("rmag_segments.json", rmag_seg.to_dict())
        self._write_table("rmag_length_edf.csv", ("length", "ccdf"),
                          _edf_rows(rmag_seg.lengths))

    def stage_fit(self):
        vol_seg = self.ensure("volume_seg")
        rows = []
        fits = {}
        for idx, seg in enumerate(vol_seg.segments):
            chunk = self.volume.values[seg.start : seg.end]
            for family in VOLUME_FAMILIES:
                try:
                    res = fit_mle(family, chunk)
                except FitError as exc:
                    rows.append((idx, family.value, "", "", "", "", f"error: {exc}"))
                    continue
                fits.setdefault(family, []).append((idx, res))
                rows.append(
                    (
                        idx,
                        family.value,
                        res.params[0],
                        res.params[1],
                        res.log_likelihood,
                        res.sqrtn_dmax,
                        int(res.ks_pass),
                    )
                )
        self._products["volume_fits"] = fits
        self._write_table(
            "volume_fits.csv",
            ("segment", "family", "p1", "p2", "loglik", "sqrtn_dmax", "ks_pass"),
            rows,
        )

        rmag_seg = self.ensure("rmag_seg")
        r = self.returns.values
        local_means = []
        local_vars = []
        rows = []
        for idx, seg in enumerate(rmag_seg.segments):
            chunk = r[seg.start : seg.end]
            local_means.append(float(np.mean(chunk)))
            local_vars.append(float(np.var(chunk)))
            for family in (Family.LAPLACE, Family.GAUSSIAN):
                try:
                    res = fit_mle(family, chunk)
                except FitError as exc:
                    rows.append((idx, family.value, "", "", "", "", f"error: {exc}"))
                    continue
                rows.append(
                    (
                        idx,
                        family.value,
                        res.params[0],
                        res.params[1],
                        res.log_likelihood,
                        res.sqrtn_dmax,
                        int(res.ks_pass),
                    )
                )
        self._write_table(
            "return_local_fits.csv",
            ("segment", "family", "p1", "p2", "loglik", "sqrtn_dmax", "ks_pass"),
            rows,
        )
        self._products["return_variances"] = np.asarray(local_vars)
        try:
            report = normality_tests(local_means)
            self._write_json(
                "normality.json",
                {
                    "t_test_p": report.t_test_p,
                    "jarque_bera_p": report.jarque_bera_p,
                    "n_segments": len(local_means),
                },
            )
        except ValueError as exc:
            self._write_json("normality.json", {"error": str(exc)})

    def stage_mixture(self):
        vol_seg = self.ensure("volume_seg")
        fits = self.ensure("volume_fits")
        lognormal_fits = fits.get(Family.LOGNORMAL, [])
        if len(lognormal_fits) < 2:
            raise StageError("too few lognormal segment fits to build a mixture")
        idxs = [i for i, _ in lognormal_fits]
        lengths = vol_seg.lengths[idxs].astype(float)
        phis = np.array([res.params[0] for _, res in lognormal_fits])
        thetas = np.array([res.params[1] for _, res in lognormal_fits])

        law = mix.fit_length_law(
            vol_seg.lengths.astype(float), self.kss_config.min_segment_length
        )
        rmag_seg = self.ensure("rmag_seg")
        rmag_law = mix.fit_length_law(
            rmag_seg.lengths.astype(float), self.kss_config.min_segment_length
        )
        self._write_json(
            "length_law.json",
            {
                "volume": {"lam": law.lam, "ell_min": law.ell_min,
                           "tail_fraction": law.tail_fraction},
                "rmag": {"lam": rmag_law.lam, "ell_min": rmag_law.ell_min,
                         "tail_fraction": rmag_law.tail_fraction},
            },
        )

        theta_prior = mix.fit_theta_prior(thetas)
        self._write_json(
            "theta_prior.json",
            {
                "family": theta_prior.family.value,
                "shape": theta_prior.shape,
                "scale": theta_prior.scale,
                "scores": theta_prior.scores,
            },
        )

        mu = vol_seg.means[idxs]
        omega = vol_seg.variances[idxs]
        relation = mix.fit_mu_omega(mu, omega)
        self._write_table(
            "mu_omega.csv",
            ("log_omega", "log_mu"),
            list(zip(np.log(omega), np.log(mu))),
        )
        rel_dict = {
            "mode": relation.mode,
            "alpha_low": relation.alpha_low,
            "beta_low": relation.beta_low,
            "sigma_low": relation.sigma_low,
            "alpha_high": relation.alpha_high,
            "beta_high": relation.beta_high,
            "sigma_high": relation.sigma_high,
            "crossover": relation.crossover,
        }
        if relation.mode == "dual":
            rel_dict["mu_at_crossover"] = relation.mu_at_crossover()
        self._write_json("mu_omega_fit.json", rel_dict)

        try:
            lvm = dyn.length_vs_mean(vol_seg, self.loess_config)
            mu_length = mix.MuLengthRelation(lvm.curve)
        except ValueError:
            mu_length = None
        model = mix.MixtureModel(
            family=Family.LOGNORMAL,
            lengths=lengths,
            phis=phis,
            thetas=thetas,
            length_law=law,
            theta_prior=theta_prior,
            mu_omega=relation,
            mu_length=mu_length,
        )
        self._products["mixture_model"] = model
        model.save(self.out / "mixture_model.json")
        self.written.append("mixture_model.json")

        v = self.volume.values
        grid = density_grid(max(np.min(v[v > 0]), 1e-4), np.max(v) * 1.5)
        weighted = mix.long_term_pdf_weighted(model, grid)
        self._write_table("pv_weighted.csv", ("v", "density"), list(zip(grid, weighted)))
        if relation.mode == "single":
            integral = mix.long_term_pdf_integral(model, grid)
            self._write_table(
                "pv_integral.csv", ("v", "density"), list(zip(grid, integral))
            )

        variances = self.ensure("return_variances")
        pos = variances[variances > 0]
        if pos.size >= 5:
            try:
                vol_fit = fit_mle(Family.INVGAMMA, pos)
                prior = mix.VolatilityPrior(
                    shape=vol_fit.params[0], scale=vol_fit.params[1]
                )
                self._write_json(
                    "volatility_prior.json",
                    {
                        "shape": prior.shape,
                        "scale": prior.scale,
                        "sqrtn_dmax": vol_fit.sqrtn_dmax,
                        "n_segments": int(pos.size),
                    },
                )
                sd = float(np.std(self.returns.values))
                r_grid = np.linspace(sd / 20.0, 10.0 * sd, 200)
                laplace = mix.return_mixture_pdf(prior, r_grid, kernel="laplace")
                gauss = mix.return_mixture_pdf(prior, r_grid, kernel="gaussian")
                self._write_table(
                    "pr_curves.csv",
                    ("r", "laplace_kernel", "gaussian_kernel"),
                    list(zip(r_grid, laplace, gauss)),
                )
                self._products["sigma_curves"] = True
            except (FitError, mix.QuadratureError) as exc:
                self._write_json("volatility_prior.json", {"error": str(exc)})
                self._products["sigma_curves"] = False
        else:
            self._write_json(
                "volatility_prior.json",
                {"error": "too few positive local variances"},
            )
            self._products["sigma_curves"] = False

    def stage_dynamics(self):
        vol_seg = self.ensure("volume_seg")
        lengths = vol_seg.lengths.astype(float)
        mu = vol_seg.means
        max_lag = min(60, len(vol_seg) - 1)
        if max_lag < 1:
            raise StageError("too few segments for dynamics diagnostics")
        cmu = dyn.autocorr(mu, max_lag=max_lag, seed=self.seed)
        self._write_table(
            "cmu.csv",
            ("lag", "covariance", "normalized", "noise_level"),
            [
                (int(l), c, nrm, cmu.noise_level)
                for l, c, nrm in zip(cmu.lags, cmu.values, cmu.normalized)
            ],
        )
        self._write_json(
            "cmu.json",
            {
                "first_noise_lag": cmu.first_noise_lag,
                "noise_level": cmu.noise_level,
                "degenerate": cmu.degenerate,
            },
        )
        if len(vol_seg) > 2:
            dl1 = dyn.length_fluctuations(lengths, 1)
            lag = min(30, dl1.size - 1)
            if lag >= 1:
                rep = dyn.autocorr(dl1, max_lag=lag, seed=self.seed)
                self._write_table(
                    "dl1_autocorr.csv",
                    ("lag", "covariance", "normalized", "noise_level"),
                    [
                        (int(l), c, nrm, rep.noise_level)
                        for l, c, nrm in zip(rep.lags, rep.values, rep.normalized)
                    ],
                )
                rep_abs = dyn.autocorr(np.abs(dl1), max_lag=lag, seed=self.seed)
                self._write_table(
                    "dl1_abs_autocorr.csv",
                    ("lag", "covariance", "normalized", "noise_level"),
                    [
                        (int(l), c, nrm, rep_abs.noise_level)
                        for l, c, nrm in zip(rep_abs.lags, rep_abs.values,
                                             rep_abs.normalized)
                    ],
                )
        classes = (60.0, 120.0, 240.0)
        try:
            profile = dyn.intraday_profile(
                vol_seg, self.volume, length_classes=classes
            )
            rows = []
            for b in range(profile.probabilities.size):
                rows.append(
                    (
                        "all",
                        b,
                        profile.boundaries[b],
                        profile.boundaries[b + 1],
                        profile.probabilities[b],
                    )
                )
            for c in range(profile.conditional.shape[0]):
                label = _class_label(classes, c)
                for b in range(profile.conditional.shape[1]):
                    rows.append(
                        (
                            label,
                            b,
                            profile.boundaries[b],
                            profile.boundaries[b + 1],
                            profile.conditional[c, b],
                        )
                    )
            self._write_table(
                "intraday_bands.csv",
                ("class", "band", "band_lo", "band_hi", "probability"),
                rows,
            )
        except ValueError as exc:
            self._write_json("intraday_bands.json", {"error": str(exc)})
        try:
            lvm = dyn.length_vs_mean(vol_seg, self.loess_config)
            self._write_table(
                "ell_vs_mu.csv",
                ("mu", "ell_hat"),
                list(zip(lvm.curve.x, lvm.curve.y_hat)),
            )
            self._write_json(
                "ell_vs_mu.json",
                {
                    "slope": lvm.slope,
                    "slope_se": lvm.slope_se,
                    "decreasing": lvm.decreasing,
                },
            )
        except ValueError as exc:
            self._write_json("ell_vs_mu.json", {"error": str(exc)})

    def stage_impact(self):
        # align volume with the returns (returns drop the first sample per session)
        ts_index = {int(t): i for i, t in enumerate(self.volume.timestamps)}
        idx = np.array([ts_index[int(t)] for t in self.returns.timestamps])
        v = self.volume.values[idx]
        r = self.returns.values
        model = self.ensure("mixture_model")

        sign_model = imp.fit_sign_prob(v, r)
        self._write_table(
            "sign_prob.csv",
            ("v", "emp_plus", "emp_minus", "fit_plus", "fit_minus"),
            [
                (vb, ep, em, sign_model.g_plus(vb), sign_model.g_minus(vb))
                for vb, ep, em in zip(
                    sign_model.bin_volumes,
                    sign_model.bin_freq_plus,
                    sign_model.bin_freq_minus,
                )
            ],
        )
        self._write_json(
            "sign_prob.json",
            {
                sign: {
                    "plateau": curve.plateau,
                    "scale": curve.scale,
                    "exponent": curve.exponent,
                }
                for sign, curve in (("plus", sign_model.plus), ("minus", sign_model.minus))
            },
        )

        fits_by_sign = {}
        sensitivity = {}
        for sign, mask in (("plus", r > 0), ("minus", r < 0)):
            if np.sum(mask) < 10:
                raise StageError(f"too few {sign}-sign returns for impact fitting")
            fits = imp.fit_impact(
                v[mask], np.abs(r[mask]), sign=sign, config=self.loess_config
            )
            fits_by_sign[sign] = fits
            sens = {}
            for frac in (0.2, 0.5):
                alt = imp.fit_impact(
                    v[mask],
                    np.abs(r[mask]),
                    sign=sign,
                    config=LoessConfig(fraction=frac),
                )
                sens[str(frac)] = {
                    f.form: {"a": f.a, "b": f.b, "chi2_per_dof": f.chi2_per_dof}
                    for f in alt
                }
            sensitivity[sign] = sens
        self._write_json(
            "impact_fits.json",
            {
                "fits": {
                    sign: {
                        f.form: {
                            "a": f.a,
                            "b": f.b,
                            "chi2_per_dof": f.chi2_per_dof,
                            "is_best": f.is_best,
                        }
                        for f in fits
                    }
                    for sign, fits in fits_by_sign.items()
                },
                "loess_fraction": self.loess_config.fraction,
                "sensitivity": sensitivity,
            },
        )

        log_fit = [f for f in fits_by_sign["plus"] if f.form == "log"][0]
        grid = density_grid(max(np.min(v[v > 0]), 1e-4), np.max(v))
        self._write_table(
            "impact_curve.csv",
            ("v", "expected_magnitude"),
            [(vv, log_fit.expected_magnitude(vv)) for vv in grid],
        )

        rmag_seg = self.ensure("rmag_seg")
        per_seg = {"plus": [], "minus": []}
        for seg in rmag_seg.segments:
            sl = slice(seg.start, seg.end)
            seg_v = v[sl]
            seg_r = r[sl]
            for sign, mask in (("plus", seg_r > 0), ("minus", seg_r < 0)):
                if np.sum(mask) < 10:
                    continue
                try:
                    fits = imp.fit_impact(
                        seg_v[mask],
                        np.abs(seg_r[mask]),
                        sign=sign,
                        config=self.loess_config,
                    )
                except ValueError:
                    continue
                log_form = [f for f in fits if f.form == "log"][0]
                per_seg[sign].append((seg.length, log_form.a, log_form.b))
        rows = [
            (sign, ell, a_val, b_val)
            for sign, entries in per_seg.items()
            for ell, a_val, b_val in entries
        ]
        self._write_table(
            "impact_params_vs_length.csv", ("sign", "length", "a", "b"), rows
        )
        homog = {}
        for sign, entries in per_seg.items():
            if len(entries) >= 20:
                ells = [e[0] for e in entries]
                a_vals = [e[1] for e in entries]
                b_vals = [e[2] for e in entries]
                report = imp.homogeneity(ells, a_vals, b_vals, self.loess_config)
                homog[sign] = {
                    name: dataclasses.asdict(getattr(report, name)) for name in ("a", "b")
                }
            else:
                homog[sign] = {"error": f"only {len(entries)} per-segment fits"}
        self._write_json("homogeneity.json", homog)

        sigma_eta = imp.impact_residual_sd(v[r != 0], np.abs(r[r != 0]), log_fit)
        nonzero_abs = np.abs(r[r != 0])
        hi = float(np.quantile(nonzero_abs, 0.999)) * 2.0
        r_grid = np.linspace(hi / 400.0, hi, 120)
        recon = imp.return_pdf_from_volume(
            model, sign_model, log_fit, sigma_eta, r_grid
        )
        self._write_table(
            "pi_r.csv", ("r", "density"), list(zip(recon.r, recon.density))
        )
        self._write_json(
            "pi_r.json",
            {
                "zero_atom": recon.zero_atom,
                "total_mass": recon.total_mass,
                "sigma_eta": sigma_eta,
                "empirical_zero_fraction": float(np.mean(r == 0)),
            },
        )

    def stage_report(self):
        summary = {
            "n_samples": len(self.volume),
            "n_returns": len(self.returns),
            "stages_written": sorted(set(self.written)),
            "p0": self.kss_config.p0,
            "min_segment_length": self.kss_config.min_segment_length,
            "seed": self.seed,
        }
        self._write_json("summary.json", summary)
        names = sorted(
            p.name
            for p in self.out.iterdir()
            if p.is_file() and p.name != "manifest.json"
        )
        manifest = {name: pio.sha256_file(self.out / name) for name in names}
        pio.write_json(self.out / "manifest.json", {"files": manifest})


def _class_label(edges, c):
    if c == 0:
        return f"<{pio.fmt(edges[0])}"
    if c == len(edges):
        return f">={pio.fmt(edges[-1])}"
    return f"{pio.fmt(edges[c - 1])}-{pio.fmt(edges[c])}"


def _add_common_args(parser):
    parser.add_argument("input", help="input CSV (timestamp,price,volume)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument(
        "--p0", type=float, default=0.95, choices=[0.90, 0.95, 0.99],
        help="segmentation significance level",
    )
    parser.add_argument("--min-seg", type=int, default=30,
                        help="minimum segment length (samples)")
    parser.add_argument("--loess-frac", type=float, default=0.3,
                        help="loess neighbor fraction")
    parser.add_argument("--seed", type=int, default=0, help="shuffle/RNG seed")
    parser.add_argument("--session-open", type=int, default=570,
                        help="session open (minute of day)")
    parser.add_argument("--session-close", type=int, default=960,
                        help="session close (minute of day)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="patchmix",
        description="Segment nonstationary series into quasi-stationary patches "
        "and reconstruct long-term distributions as mixtures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic input fixture")
    synth.add_argument("--mode", choices=["volume", "returns", "coupled"],
                       default="coupled")
    synth.add_argument("--n", type=int, default=50_000, help="series length")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="output directory")

    for name in ("segment", "fit", "mixture", "dynamics", "impact", "report", "all"):
        stage_parser = sub.add_parser(name, help=f"run the {name} stage")
        _add_common_args(stage_parser)
    return parser


def _run_synth(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    spec = SynthSpec(seed=args.seed, n_points=args.n)
    if args.mode == "volume":
        series, truth = generate_volume(spec)
        prices = np.full(len(series), 100.0)
        volumes = series.values
        timestamps = series.timestamps
        truth_dict = {
            "mode": "volume",
            "lengths": truth.lengths.tolist(),
            "cuts": truth.cuts.tolist(),
            "phis": truth.phis.tolist(),
            "thetas": truth.thetas.tolist(),
        }
    elif args.mode == "returns":
        series, truth = generate_returns(spec)
        prices = 100.0 + np.concatenate(([0.0], np.cumsum(series.values[1:])))
        volumes = np.ones(len(series))
        timestamps = series.timestamps
        truth_dict = {
            "mode": "returns",
            "lengths": truth.lengths.tolist(),
            "cuts": truth.cuts.tolist(),
            "sigma2s": truth.sigma2s.tolist(),
        }
    else:
        volume, returns, truth = generate_coupled(spec)
        prices = 100.0 + np.concatenate(([0.0], np.cumsum(returns.values[1:])))
        volumes = volume.values
        timestamps = volume.timestamps
        truth_dict = {
            "mode": "coupled",
            "lengths": truth.volume.lengths.tolist(),
            "cuts": truth.volume.cuts.tolist(),
            "phis": truth.volume.phis.tolist(),
            "thetas": truth.volume.thetas.tolist(),
            "impact_a": spec.impact_a,
            "impact_b": spec.impact_b,
            "impact_sigma": spec.impact_sigma,
        }
    pio.write_price_volume_csv(out / "input.csv", timestamps, prices, volumes)
    pio.write_json(out / "truth.json", truth_dict)
    return 0


def run(args) -> int:
    """Execute one CLI invocation; returns the process exit code."""
    if args.command == "synth":
        return _run_synth(args)
    try:
        calendar = TradingCalendar(args.session_open, args.session_close)
        kss = KssConfig(p0=args.p0, min_segment_length=args.min_seg)
        loess = LoessConfig(fraction=args.loess_frac)
    except ValueError as exc:
        print(f"patchmix: config error: {exc}", file=sys.stderr)
        return 2
    try:
        pipeline = Pipeline(args.input, args.out, kss, loess, args.seed, calendar)
    except ConfigError as exc:
        print(f"patchmix: {exc}", file=sys.stderr)
        return 2
    stages = STAGES if args.command == "all" else (args.command,)
    stage_fn = {
        "segment": pipeline.stage_segment,
        "fit": pipeline.stage_fit,
        "mixture": pipeline.stage_mixture,
        "dynamics": pipeline.stage_dynamics,
        "impact": pipeline.stage_impact,
        "report": pipeline.stage_report,
    }
    for stage in stages:
        try:
            stage_fn[stage]()
        except (StageError, ValueError, FitError, mix.QuadratureError) as exc:
            print(f"patchmix: stage {stage} failed: {exc}", file=sys.stderr)
            return 1
        except Exception:
            print(f"patchmix: stage {stage} crashed:", file=sys.stderr)
            traceback.print_exc()
            return 1
    if args.command != "report" and args.command != "all":
        # keep a manifest in sync for single-stage runs as well
        pipeline.stage_report()
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code = run(args)
    if code == 0:
        print("patchmix: ok")
    return code


if __name__ == "__main__":
    sys.exit(main())
