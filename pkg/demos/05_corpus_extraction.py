#!/usr/bin/env python3
"""Walkthrough: pulling table environments out of a .tex source.

Comment text never terminates an environment, escaped percent signs
survive, nested tabulars ride along inside their parent, and an
unclosed environment is reported and skipped rather than crashing the
extraction.
"""

import logging

from latte.corpus import extract_tabulars, strip_comments

logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")

DOCUMENT = r"""
\section{Results}
Headline table: % the real one
\begin{tabular}{lcc}
method & acc (\%) & time \\ % header row
alpha  & 93.1     & 2s   \\
beta   & 95.4     & 3s   \\
% \end{tabular}  <- commented out, must not close the environment
\end{tabular}

A nested layout:
\begin{tabular}{c}
\begin{tabular}{cc} inner & cells \end{tabular} \\
\end{tabular}

And one the author never closed:
\begin{tabular}{c}
whoops \\
"""

print("comment-stripped preview:")
print("\n".join(strip_comments(DOCUMENT).splitlines()[:6]))
print()

tables = extract_tabulars(DOCUMENT)
print(f"extracted {len(tables)} outermost tabular environment(s):\n")
for i, body in enumerate(tables, 1):
    print(f"--- table {i} ---")
    print(body)
    print()
