"""Operator command line: score, batch-score, calibrate, stats, report,
gen-fixtures, serve.

Machine output goes to stdout (JSON in ``--format json`` mode); human
diagnostics go to stderr. Exit code 0 means the evaluation ran, whatever
the reward; exit code 2 means bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .calibrate.grid import (
    GridSpec,
    calibrate,
    majority_label,
    score_pairs,
    sensitivity_sweep,
)
from .calibrate.stats import (
    cohen_kappa,
    fleiss_kappa,
    labels_to_matrix,
    noise_model_report,
    pairwise_agreement_rate,
    three_rater_agreement_rate,
)
from .engine import MODE_FULL, MODE_RULE_ONLY, breakdown_to_dict, score_plan
from .errors import TripScoreError
from .ingest import (
    FixtureSpec,
    catalog_to_json,
    fixture_manifest,
    generate_fixture,
    itinerary_to_json,
    load_catalog,
    load_pairs,
    load_queries,
    load_weights,
    query_from_dict,
    query_to_dict,
    weights_from_dict,
    weights_to_dict,
)
from .model import DEFAULT_WEIGHTS, RULE_CONSTRAINTS
from .reward import corpus_metrics
from .service import ServiceConfig, run as run_service


def _log(message: str):
    print(message, file=sys.stderr)


def _fail(message: str) -> int:
    _log(f"error: {message}")
    return 2


def _emit(doc, fmt: str, table_lines):
    if fmt == "json":
        print(json.dumps(doc, indent=2, ensure_ascii=False))
    else:
        for line in table_lines:
            print(line)


# -- score ----------------------------------------------------------------------


def cmd_score(args) -> int:
    try:
        catalog = load_catalog(args.catalog)
        with open(args.itinerary, encoding="utf-8") as fh:
            plan_text = fh.read()
        with open(args.query, encoding="utf-8") as fh:
            query = query_from_dict(json.load(fh))
        weights = load_weights(args.weights) if args.weights else DEFAULT_WEIGHTS
    except (OSError, json.JSONDecodeError, TripScoreError) as exc:
        return _fail(str(exc))

    judge = None
    if args.mode == MODE_FULL:
        from .judge import JudgeConfig, http_judge

        try:
            judge = http_judge(JudgeConfig.from_env())
        except TripScoreError as exc:
            return _fail(f"full mode requires a judge: {exc}")

    breakdown = score_plan(plan_text, query, catalog, weights=weights, mode=args.mode, judge=judge)
    doc = breakdown_to_dict(breakdown)
    lines = [
        f"reward            {breakdown.reward:.6f}",
        f"format score      {breakdown.format_score:+d}",
        f"commonsense score {breakdown.commonsense_score if breakdown.commonsense_score is not None else '-'}",
    ]
    if breakdown.soft is not None:
        lines.append("soft              " + " ".join(f"{v:.4f}" for v in breakdown.soft.as_array()))
    for violation in breakdown.violations:
        lines.append(f"violation         {violation.constraint_id} day={violation.day_index} {violation.detail}")
    _emit(doc, args.format, lines)
    return 0


def cmd_batch_score(args) -> int:
    try:
        catalog = load_catalog(args.catalog)
        queries = load_queries(args.queries)
        names = sorted(os.listdir(args.itineraries))
    except (OSError, TripScoreError) as exc:
        return _fail(str(exc))
    plan_files = [n for n in names if n.endswith(".json")]
    if not plan_files:
        return _fail(f"no .json plans under {args.itineraries}")

    def run_one(name):
        path = os.path.join(args.itineraries, name)
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        query_id = args.query_id or name.rsplit(".", 1)[0]
        query = queries.get(query_id)
        if query is None:
            return name, None
        return name, score_plan(text, query, catalog, mode=MODE_RULE_ONLY)

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(run_one, plan_files))

    out = []
    for name, breakdown in results:
        if breakdown is None:
            out.append({"file": name, "error": "no matching query"})
        else:
            out.append({"file": name, **breakdown_to_dict(breakdown)})
    _emit(out, args.format, [f"{r['file']}\t{r.get('reward', 'ERR')}" for r in out])
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for row in out:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        _log(f"wrote {len(out)} breakdowns to {args.out}")
    return 0


# -- calibrate ------------------------------------------------------------------


def cmd_calibrate(args) -> int:
    try:
        pairs = load_pairs(args.pairs)
        catalog = load_catalog(args.catalog)
        queries = load_queries(args.queries)
    except (OSError, TripScoreError) as exc:
        return _fail(str(exc))
    if args.grid and args.grid != "default":
        try:
            with open(args.grid, encoding="utf-8") as fh:
                raw = json.load(fh)
            grid = GridSpec(
                w1_grid=tuple(raw["w1"]),
                w2_grid=tuple(raw["w2"]),
                w3_grid=tuple(raw["w3"]),
                w4_grid=tuple(raw["w4"]),
            )
        except (OSError, KeyError, json.JSONDecodeError, ValueError) as exc:
            return _fail(f"bad grid file: {exc}")
    else:
        grid = GridSpec()

    scored = score_pairs(pairs, queries, catalog)
    if len(scored) < 10:
        return _fail(f"need at least 10 majority-labeled pairs, got {len(scored)}")
    _log(f"calibrating on {len(scored)} pairs over {grid.size()} grid points")
    result = calibrate(
        scored, grid, cv_folds=args.cv, bootstrap_iterations=args.bootstrap, seed=args.seed
    )
    doc = {
        "bestWeights": weights_to_dict(result.best_theta),
        "trainAccuracy": result.train_accuracy,
        "foldAccuracies": list(result.fold_accuracies),
        "foldMean": result.fold_mean,
        "foldStd": result.fold_std,
        "bootstrapPoint": result.bootstrap_point,
        "bootstrapCI": [result.bootstrap_low, result.bootstrap_high],
        "kendallTau": result.kendall,
    }
    if args.sweep:
        doc["sensitivity"] = sensitivity_sweep(scored, result.best_theta)
    lines = [
        f"train accuracy   {result.train_accuracy:.4f}",
        f"cv accuracy      {result.fold_mean:.4f} +- {result.fold_std:.4f}  {list(np.round(result.fold_accuracies, 4))}",
        f"bootstrap        {result.bootstrap_point:.4f}  CI [{result.bootstrap_low:.4f}, {result.bootstrap_high:.4f}]",
        f"kendall tau      {result.kendall:.4f}",
        f"best weights     {weights_to_dict(result.best_theta)}",
    ]
    _emit(doc, args.format, lines)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
        _log(f"wrote calibration report to {args.out}")
    return 0


# -- stats ----------------------------------------------------------------------


def _rater_vectors_from_pairs(path):
    pairs = load_pairs(path)
    if not pairs:
        raise TripScoreError("no pairs in file")
    width = min(len(p.rater_labels) for p in pairs)
    return [[p.rater_labels[i] for p in pairs] for i in range(width)]


def cmd_stats(args) -> int:
    doc = {}
    lines = []
    try:
        if args.pairs or args.ratings:
            if args.pairs:
                raters = _rater_vectors_from_pairs(args.pairs)
            else:
                with open(args.ratings, encoding="utf-8") as fh:
                    raters = json.load(fh)["raters"]
            if len(raters) < 2:
                return _fail("need at least two raters for agreement statistics")
            a_pair = pairwise_agreement_rate(raters)
            a_all = three_rater_agreement_rate(raters)
            kappas = [
                cohen_kappa(raters[i], raters[j])
                for i in range(len(raters))
                for j in range(i + 1, len(raters))
            ]
            categories = sorted({label for vec in raters for label in vec}, key=str)
            fleiss = fleiss_kappa(labels_to_matrix(raters, categories))
            doc.update(
                {
                    "raters": len(raters),
                    "items": len(raters[0]),
                    "pairwiseAgreement": a_pair,
                    "allAgree": a_all,
                    "meanCohenKappa": float(np.mean(kappas)),
                    "fleissKappa": fleiss,
                }
            )
            lines += [
                f"raters             {len(raters)}  items {len(raters[0])}",
                f"pairwise agreement {a_pair:.4f}",
                f"all-agree rate     {a_all:.4f}",
                f"mean Cohen kappa   {np.mean(kappas):.4f}",
                f"Fleiss kappa       {fleiss:.4f}",
            ]
            noise = noise_model_report(a_pair, args.k, args.model_agreement, a_all)
        elif args.apair is not None:
            noise = noise_model_report(args.apair, args.k, args.model_agreement)
        else:
            return _fail("provide --pairs, --ratings, or --apair")
        doc["noiseModel"] = noise
        lines.append(f"reliability r      {noise['humanReliability']:.4f}")
        lines.append(f"predicted all-agree {noise['predictedAllAgree']:.4f}")
        if "modelReliability" in noise:
            lines.append(f"model reliability  {noise['modelReliability']:.4f}")
            lines.append(f"ceiling ratio      {noise['ceilingRatio']:.4f}")
    except TripScoreError as exc:
        return _fail(str(exc))
    _emit(doc, args.format, lines)
    return 0


# -- report ---------------------------------------------------------------------


def cmd_report(args) -> int:
    try:
        names = sorted(os.listdir(args.breakdowns))
    except OSError as exc:
        return _fail(str(exc))
    rows = []
    for name in names:
        if not (name.endswith(".json") or name.endswith(".jsonl")):
            continue
        path = os.path.join(args.breakdowns, name)
        with open(path, encoding="utf-8") as fh:
            if name.endswith(".jsonl"):
                rows.extend(json.loads(line) for line in fh if line.strip())
            else:
                rows.append(json.load(fh))
    if not rows:
        return _fail(f"no breakdown documents under {args.breakdowns}")

    total = len(rows)
    delivered = [r for r in rows if r.get("formatScore") == 1]
    feasible = [r for r in delivered if r.get("commonsenseScore") == 1]
    histogram: dict[str, int] = {}
    total_violations = 0
    for row in rows:
        for violation in row.get("violations", []):
            histogram[violation["constraintId"]] = histogram.get(violation["constraintId"], 0) + 1
            total_violations += 1
    mean_reward = sum(r.get("reward", 0.0) for r in rows) / total
    cond = sum(r["reward"] for r in feasible) / len(feasible) if feasible else None
    doc = {
        "n": total,
        "deliveryRate": len(delivered) / total,
        "commonsensePassRate": (len(feasible) / len(delivered)) if delivered else None,
        "meanReward": mean_reward,
        "condReward": cond,
        "violationHistogram": dict(sorted(histogram.items(), key=lambda kv: -kv[1])),
        "totalViolations": total_violations,
    }
    lines = [
        f"plans       {total}",
        f"DR          {doc['deliveryRate']:.4f}",
        f"CPR         {doc['commonsensePassRate'] if doc['commonsensePassRate'] is not None else '-'}",
        f"mean reward {mean_reward:.4f}",
        f"cond reward {cond if cond is not None else '-'}",
        "top violations:",
    ]
    for cid, count in list(doc["violationHistogram"].items())[:5]:
        lines.append(f"  {cid:28s} {count}")
    _emit(doc, args.format, lines)
    return 0


# -- gen-fixtures -----------------------------------------------------------------


def cmd_gen_fixtures(args) -> int:
    planted = tuple(args.plant or ())
    for cid in planted:
        if cid not in RULE_CONSTRAINTS:
            return _fail(f"unknown constraint id {cid!r}; choose from {', '.join(RULE_CONSTRAINTS)}")
    os.makedirs(args.out, exist_ok=True)
    index = []
    for i in range(args.count):
        spec = FixtureSpec(
            seed=args.seed + i,
            cities_count=args.cities,
            pois_per_city=args.pois_per_city,
            duration_days=args.days,
            planted=planted,
        )
        try:
            query, catalog, itinerary = generate_fixture(spec)
            manifest = fixture_manifest(spec)
        except TripScoreError as exc:
            return _fail(str(exc))
        stem = f"fixture-{spec.seed:08d}"
        with open(os.path.join(args.out, f"{stem}.itinerary.json"), "w", encoding="utf-8") as fh:
            fh.write(itinerary_to_json(itinerary))
        with open(os.path.join(args.out, f"{stem}.catalog.json"), "w", encoding="utf-8") as fh:
            fh.write(catalog_to_json(catalog))
        with open(os.path.join(args.out, f"{stem}.query.json"), "w", encoding="utf-8") as fh:
            json.dump(query_to_dict(query), fh, indent=2, ensure_ascii=False)
        with open(os.path.join(args.out, f"{stem}.manifest.json"), "w", encoding="utf-8") as fh:
            json.dump({"spec": {
                "seed": spec.seed,
                "citiesCount": spec.cities_count,
                "poisPerCity": spec.pois_per_city,
                "durationDays": spec.duration_days,
                "planted": list(spec.planted),
            }, "mutations": manifest}, fh, indent=2, ensure_ascii=False)
        index.append(stem)
    _log(f"wrote {len(index)} fixtures under {args.out}")
    print(json.dumps(index))
    return 0


# -- serve ------------------------------------------------------------------------


def cmd_serve(args) -> int:
    try:
        config = ServiceConfig.load(
            args.config,
            catalog_path=args.catalog,
            queries_path=args.queries,
            weights_path=args.weights,
            port=args.port,
        )
        run_service(config)
    except TripScoreError as exc:
        return _fail(str(exc))
    return 0


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tripscore", description="Itinerary evaluation engine")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score one itinerary")
    p.add_argument("--itinerary", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--weights")
    p.add_argument("--mode", choices=[MODE_RULE_ONLY, MODE_FULL], default=MODE_RULE_ONLY)
    p.add_argument("--format", choices=["json", "table"], default="table")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("batch-score", help="score a directory of itineraries")
    p.add_argument("--itineraries", required=True, help="directory of plan .json files")
    p.add_argument("--queries", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--query-id", help="score every plan against this one query")
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--out", help="write JSONL breakdowns here")
    p.add_argument("--format", choices=["json", "table"], default="table")
    p.set_defaults(func=cmd_batch_score)

    p = sub.add_parser("calibrate", help="learn weights from labeled pairs")
    p.add_argument("--pairs", required=True, help="JSONL annotation pairs")
    p.add_argument("--catalog", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--grid", default="default", help="'default' or a grid JSON file")
    p.add_argument("--cv", type=int, default=5)
    p.add_argument("--bootstrap", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweep", action="store_true", help="include the sensitivity sweep")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--format", choices=["json", "table"], default="table")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("stats", help="agreement and reliability statistics")
    p.add_argument("--pairs", help="JSONL annotation pairs with rater labels")
    p.add_argument("--ratings", help="JSON file with {'raters': [[...], ...]}")
    p.add_argument("--apair", type=float, help="pairwise agreement for the noise model")
    p.add_argument("--k", type=int, default=3, help="number of label classes")
    p.add_argument("--model-agreement", type=float, help="model-vs-annotator raw agreement")
    p.add_argument("--format", choices=["json", "table"], default="table")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("report", help="corpus metrics over breakdown files")
    p.add_argument("--breakdowns", required=True, help="directory of breakdown JSON/JSONL")
    p.add_argument("--format", choices=["json", "table"], default="table")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("gen-fixtures", help="generate synthetic fixtures")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--days", type=int, default=3)
    p.add_argument("--cities", type=int, default=1)
    p.add_argument("--pois-per-city", type=int, default=8)
    p.add_argument("--plant", action="append", help="constraint id to plant (repeatable)")
    p.set_defaults(func=cmd_gen_fixtures)

    p = sub.add_parser("serve", help="run the scoring service")
    p.add_argument("--config")
    p.add_argument("--catalog")
    p.add_argument("--queries")
    p.add_argument("--weights")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
