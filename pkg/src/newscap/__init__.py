"""newscap: entity-aware news captioning toolkit.

Core pieces: corpus ingestion and sentence accounting (``corpus``), entity
recognition and matching (``ner``), alignment-task sample construction
(``alignment``), textual-input regimes (``context``), the model wire
protocol and two-stage generation (``gateway``), caption metrics
(``metrics``), loss arithmetic (``loss``), and a FastAPI service plus thin
CLI on top (``service``, ``cli``).
"""

__version__ = "0.1.0"
