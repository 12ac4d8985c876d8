"""Facial control curves, renderer, dataset builder and evaluation harness."""

from facectl._facectl import (
    DEFAULT_THRESHOLD,
    DEFAULT_TIMESTEP,
    NUM_CONTROLS,
    Clip,
    FacectlError,
    build_dataset,
    channel_stats,
    clamp,
    dedup,
    eval_bezier_at_time,
    evaluate,
    histograms,
    is_legal,
    load_clip,
    load_manifest,
    neutral_vector,
    registry,
    render,
    sample_clip,
    sample_count,
    save_clip,
    solve_bezier_time,
    ssim,
    summarize_errors,
    synthetic_clips,
    verify,
)

__all__ = [
    "DEFAULT_THRESHOLD",
    "DEFAULT_TIMESTEP",
    "NUM_CONTROLS",
    "Clip",
    "FacectlError",
    "build_dataset",
    "channel_stats",
    "clamp",
    "dedup",
    "eval_bezier_at_time",
    "evaluate",
    "histograms",
    "is_legal",
    "load_clip",
    "load_manifest",
    "neutral_vector",
    "registry",
    "render",
    "sample_clip",
    "sample_count",
    "save_clip",
    "solve_bezier_time",
    "ssim",
    "summarize_errors",
    "synthetic_clips",
    "verify",
]
