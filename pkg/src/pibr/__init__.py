"""pibr: iterated best response over policy programs.

Policies are source code in a small sandboxed language; best responses
are synthesized by pluggable operators (deterministic oracles or a
chat-completions endpoint) and improved by an alternating outer loop that
tracks social welfare and returns the best profile seen. A modal-logic
arena evaluates provability-conditioned agents (FairBot and friends) on
finite frames.
"""

__version__ = "0.1.0"
