"""Corpus pipeline for medication sentiment in discussion-forum posts.

Stages: keyword cohort filter -> lexicon mention matching -> context window
extraction -> sentiment labeling -> statistical characterization -> report.
Each stage reads and writes plain files (JSONL / TSV) so runs are resumable
and every intermediate is inspectable.
"""

from trdsent.errors import PipelineError

__version__ = "0.1.0"

__all__ = ["PipelineError", "__version__"]
