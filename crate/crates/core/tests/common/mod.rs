//! Shared corpus of sample documents exercising every pipeline feature.

/// (name, source) pairs; each must convert without fatal errors.
pub const CORPUS: &[(&str, &str)] = &[
    ("plain", "Just a paragraph of text.\n\nAnd a second one.\n"),
    (
        "sections",
        "\\section{Introduction}\nOpening words.\n\\subsection{Background}\nDetail text.\n\\section{Results}\nFindings here.\n",
    ),
    (
        "macros",
        "\\def\\term#1{\\textbf{#1}}\\term{lexer} and \\term{parser} \\emph{interact}.\n",
    ),
    (
        "math",
        "\\section{Formulas}\nInline $E=mc^2$ and the root $\\sqrt{x^2+y^2}$, then\n$$\\frac{-b+\\sqrt{b^2-4ac}}{2a}$$\ncloses the page.\n",
    ),
    (
        "graphics",
        "\\section{Figure}\nA triangle:\n\\begin{gpicture}\\gdv@moveto{0pt}{0pt}\\gdv@lineto{20pt}{0pt}\\gdv@lineto{10pt}{15pt}\\gdv@closepath\\gdv@stroke\\end{gpicture}\n",
    ),
    (
        "crossrefs",
        "\\section{One}\\label{sec:one}\nText in one; see \\ref{sec:two}.\n\\section{Two}\\label{sec:two}\nBack to \\ref{sec:one}.\n",
    ),
    (
        "book",
        "\\section{Alpha}\\label{a}\nSee $x^2$ in \\ref{b}.\n\\section{Beta}\\label{b}\n\\begin{gpicture}\\gdv@moveto{0pt}{0pt}\\gdv@lineto{5pt}{5pt}\\gdv@stroke\\end{gpicture}\n\\section{Gamma}\nGreek: $\\alpha+\\beta=\\gamma$.\n",
    ),
    (
        "registers",
        "\\count0=41 \\advance\\count0 by 1 The answer is \\the\\count0.\n",
    ),
];
