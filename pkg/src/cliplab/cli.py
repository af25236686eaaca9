"""Operator command line: full pipeline without the browser UI.

Exit codes: 0 ok, 2 validation, 3 io, 4 numeric failure. Failures print
a machine-readable JSON error object on stderr.
"""

from __future__ import annotations

import functools
import json
import subprocess
import sys
from pathlib import Path

import click

from .core import export_document
from .embedding import TsneConfig, run_tsne
from .errors import CliplabError, ValidationError
from .metrics import compute_report, homogeneity_completeness, kmeans
from .session import SessionState, load_session, new_session, save_session


def _fail(exc: CliplabError):
    json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}}, sys.stderr)
    sys.stderr.write("\n")
    sys.exit(exc.exit_code)


def _handled(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CliplabError as exc:
            _fail(exc)

    return wrapper


def _tsne_options(fn):
    decorators = [
        click.option("--perplexity", type=float, default=30.0, show_default=True),
        click.option("--early-exaggeration", "--exaggeration", "early_exaggeration",
                     type=float, default=12.0, show_default=True),
        click.option("--learning-rate", "--lr", "learning_rate",
                     type=float, default=200.0, show_default=True),
        click.option("--iterations", "--iters", "iterations",
                     type=int, default=2500, show_default=True),
        click.option("--theta", type=float, default=0.5, show_default=True),
        click.option("--exaggeration-iters", type=int, default=250, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


def _config_from(perplexity, early_exaggeration, learning_rate, iterations,
                 theta, exaggeration_iters, seed) -> TsneConfig:
    return TsneConfig(
        perplexity=perplexity,
        early_exaggeration=early_exaggeration,
        learning_rate=learning_rate,
        iterations=iterations,
        theta=theta,
        exaggeration_iters=exaggeration_iters,
        seed=seed,
    )


def _labeled_subset(session: SessionState):
    labels = session.store.current_labels()
    pairs = [
        (pt, labels[c.clip_id])
        for c, pt in zip(session.dataset.clips, session.embedding.points)
        if c.clip_id in labels
    ]
    return [p for p, _ in pairs], [l for _, l in pairs]


@click.group()
def main():
    """Video clip annotation workbench."""


@main.command()
@click.argument("manifest", type=click.Path())
@click.option("--out", "out_session", type=click.Path(), required=True,
              help="Where the session file is written.")
@click.option("--budget-seconds", type=float, default=None,
              help="Optional annotation budget cap.")
@click.option("--extractor-cmd", default=None,
              help="Shell command run first, expected to write the manifest.")
@_handled
def ingest(manifest, out_session, budget_seconds, extractor_cmd):
    """Load a feature manifest into a fresh session."""
    if extractor_cmd:
        proc = subprocess.run(extractor_cmd, shell=True)
        if proc.returncode != 0:
            raise ValidationError(f"extractor command failed with exit {proc.returncode}")
    session = new_session(manifest, budget_seconds=budget_seconds)
    save_session(session, out_session)
    labeled, unlabeled = session.pool_counts()
    click.echo(f"session written to {out_session}: "
               f"{len(session.dataset.videos)} videos, {unlabeled} clips unlabeled")


@main.command()
@click.argument("session_file", type=click.Path())
@click.option("--out", "out_embedding", type=click.Path(), default=None,
              help="Embedding JSON path (defaults next to the session file).")
@_tsne_options
@_handled
def embed(session_file, out_embedding, **tsne_kwargs):
    """Embed the session's features into 2D and store the result."""
    config = _config_from(**tsne_kwargs)
    session = load_session(session_file)
    embedding = run_tsne(session.dataset.features, config)

    out = Path(out_embedding) if out_embedding else Path(session_file).with_suffix(".embedding.json")
    out.write_text(json.dumps(embedding.to_dict(), indent=1))
    session.embedding = embedding
    try:
        session.embedding_path = str(out.relative_to(Path(session_file).parent))
    except ValueError:
        session.embedding_path = str(out)
    save_session(session, session_file)
    click.echo(f"embedded {len(embedding.points)} clips -> {out} "
               f"(final KL {embedding.kl_trace[-1][1]:.4f})")


@main.command()
@click.argument("session_file", type=click.Path())
@click.option("--knn-k", type=int, default=4, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_handled
def metrics(session_file, knn_k, seed):
    """Print the metrics report for the current embedding and labels."""
    session = load_session(session_file)
    if session.embedding is None:
        raise ValidationError("session has no embedding; run `cliplab embed` first")
    points, labels = _labeled_subset(session)
    if len(labels) < 2:
        raise ValidationError(f"need at least 2 labeled clips, have {len(labels)}")
    toa_minutes = session.cumulative_toa() / 60.0
    report = compute_report(
        points, labels, knn_k=knn_k, seed=seed,
        video_minutes=session.dataset.total_video_minutes(),
        annotation_minutes=toa_minutes if toa_minutes > 0 else None,
    )
    click.echo(json.dumps(report.to_dict(), indent=1))


@main.command()
@click.argument("session_file", type=click.Path())
@click.option("--perplexities", default="5,15,30,50,100,120", show_default=True,
              help="Comma-separated perplexity values to sweep.")
@click.option("--iterations", "--iters", "iterations", type=int, default=2500,
              show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_handled
def emulate(session_file, perplexities, iterations, seed):
    """Sweep perplexities and print global-level projection quality."""
    session = load_session(session_file)
    try:
        values = [float(v) for v in perplexities.split(",") if v.strip()]
    except ValueError as exc:
        raise ValidationError(f"bad --perplexities list: {exc}") from exc
    if not values:
        raise ValidationError("at least one perplexity is required")

    labels_by_clip = session.store.current_labels()
    labeled_idx = [i for i, c in enumerate(session.dataset.clips)
                   if c.clip_id in labels_by_clip]
    if len(labeled_idx) < 2:
        raise ValidationError("emulation needs labeled clips; assign labels first")
    labels = [labels_by_clip[session.dataset.clips[i].clip_id] for i in labeled_idx]
    n_classes = len(set(labels))

    rows = {"homogeneity": [], "completeness": []}
    for perplexity in values:
        config = TsneConfig(perplexity=perplexity, iterations=iterations, seed=seed)
        embedding = run_tsne(session.dataset.features, config)
        points = embedding.points[labeled_idx]
        clusters = kmeans(points, n_classes, seed=seed)
        h, c = homogeneity_completeness(clusters, labels)
        rows["homogeneity"].append(h)
        rows["completeness"].append(c)

    header = ["".ljust(14)] + [f"px-{v:g}".rjust(9) for v in values]
    click.echo("".join(header))
    for name in ("homogeneity", "completeness"):
        cells = [name.ljust(14)] + [f"{100 * v:.1f}%".rjust(9) for v in rows[name]]
        click.echo("".join(cells))


@main.command()
@click.argument("session_file", type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--static-dir", type=click.Path(), default=None,
              help="Frontend bundle to serve at / (defaults to frontend/dist if present).")
@_tsne_options
@_handled
def serve(session_file, host, port, static_dir, **tsne_kwargs):
    """Start the annotation HTTP server for the browser UI."""
    import uvicorn

    from .server import SessionRuntime, create_app

    config = _config_from(**tsne_kwargs)
    session = load_session(session_file)
    runtime = SessionRuntime(session, tsne_config=config)
    if session.embedding is None:
        runtime.schedule_embed()
    if static_dir is None:
        default_static = Path.cwd() / "frontend" / "dist"
        static_dir = default_static if default_static.is_dir() else None
    app = create_app(runtime, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command()
@click.argument("session_file", type=click.Path())
@click.option("--out", "out_json", type=click.Path(), default=None,
              help="Write the export document here instead of stdout.")
@_handled
def export(session_file, out_json):
    """Export labeled temporal segments for every video."""
    session = load_session(session_file)
    doc = export_document(session.dataset, session.store)
    text = json.dumps(doc, indent=1)
    if out_json:
        Path(out_json).write_text(text)
        n_segments = sum(len(v) for v in doc["videos"].values())
        click.echo(f"wrote {n_segments} segments for {len(doc['videos'])} videos to {out_json}")
    else:
        click.echo(text)


if __name__ == "__main__":
    main()
