//! Golden MathML suite: 30 expressions pinned to their exact
//! presentation-MathML serializations.

use texsmith_core::catcode::CatcodeTable;
use texsmith_core::math::{mathml, parse_math, Display};
use texsmith_core::tokenizer::tokenize;

const GOLDENS: &[(&str, &str)] = &[
    ("x", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mi>x</mi></math>"),
    ("42", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mn>42</mn></math>"),
    ("3.14", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mn>3.14</mn></math>"),
    ("x+y", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mi>x</mi><mo>+</mo><mi>y</mi></mrow></math>"),
    ("a-b+c", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mi>a</mi><mo>-</mo><mi>b</mi><mo>+</mo><mi>c</mi></mrow></math>"),
    ("x=y", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mi>x</mi><mo>=</mo><mi>y</mi></mrow></math>"),
    ("a<b", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mi>a</mi><mo>&lt;</mo><mi>b</mi></mrow></math>"),
    ("2x", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mn>2</mn><mi>x</mi></mrow></math>"),
    ("x^2", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><msup><mi>x</mi><mn>2</mn></msup></math>"),
    ("x_i", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><msub><mi>x</mi><mi>i</mi></msub></math>"),
    ("x_i^2", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><msubsup><mi>x</mi><mi>i</mi><mn>2</mn></msubsup></math>"),
    ("x^{n+1}", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><msup><mi>x</mi><mrow><mi>n</mi><mo>+</mo><mn>1</mn></mrow></msup></math>"),
    ("a_{ij}", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><msub><mi>a</mi><mrow><mi>i</mi><mi>j</mi></mrow></msub></math>"),
    ("\\alpha", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mi>α</mi></math>"),
    ("\\alpha+\\beta", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mi>α</mi><mo>+</mo><mi>β</mi></mrow></math>"),
    ("\\Omega", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mi>Ω</mi></math>"),
    ("\\frac{1}{2}", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mfrac><mn>1</mn><mn>2</mn></mfrac></math>"),
    ("\\frac{x+1}{x-1}", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mfrac><mrow><mi>x</mi><mo>+</mo><mn>1</mn></mrow><mrow><mi>x</mi><mo>-</mo><mn>1</mn></mrow></mfrac></math>"),
    ("\\frac{\\alpha}{2}", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mfrac><mi>α</mi><mn>2</mn></mfrac></math>"),
    ("\\sqrt{2}", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><msqrt><mn>2</mn></msqrt></math>"),
    ("\\sqrt{x^2+y^2}", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><msqrt><mrow><msup><mi>x</mi><mn>2</mn></msup><mo>+</mo><msup><mi>y</mi><mn>2</mn></msup></mrow></msqrt></math>"),
    ("\\sqrt\\pi", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><msqrt><mi>π</mi></msqrt></math>"),
    ("(x+y)", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mo>(</mo><mrow><mi>x</mi><mo>+</mo><mi>y</mi></mrow><mo>)</mo></mrow></math>"),
    ("(a+b)^2", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><msup><mrow><mo>(</mo><mrow><mi>a</mi><mo>+</mo><mi>b</mi></mrow><mo>)</mo></mrow><mn>2</mn></msup></math>"),
    ("f(x)", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mi>f</mi><mrow><mo>(</mo><mi>x</mi><mo>)</mo></mrow></mrow></math>"),
    ("\\left(\\frac{a}{b}\\right)", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mo>(</mo><mfrac><mi>a</mi><mi>b</mi></mfrac><mo>)</mo></mrow></math>"),
    ("\\left[x\\right]", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mo>[</mo><mi>x</mi><mo>]</mo></mrow></math>"),
    ("E=mc^2", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mi>E</mi><mo>=</mo><mrow><mi>m</mi><msup><mi>c</mi><mn>2</mn></msup></mrow></mrow></math>"),
    ("e^{i\\pi}+1=0", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mrow><mrow><msup><mi>e</mi><mrow><mi>i</mi><mi>π</mi></mrow></msup><mo>+</mo><mn>1</mn></mrow><mo>=</mo><mn>0</mn></mrow></math>"),
    ("\\frac{-b+\\sqrt{b^2-4ac}}{2a}", "<math xmlns=\"http://www.w3.org/1998/Math/MathML\" display=\"inline\"><mfrac><mrow><mo>-</mo><mi>b</mi><mo>+</mo><msqrt><mrow><msup><mi>b</mi><mn>2</mn></msup><mo>-</mo><mrow><mn>4</mn><mi>a</mi><mi>c</mi></mrow></mrow></msqrt></mrow><mrow><mn>2</mn><mi>a</mi></mrow></mfrac></math>"),
];

#[test]
fn math_golden_suite() {
    assert_eq!(GOLDENS.len(), 30);
    let table = CatcodeTable::default();
    for (expr, golden) in GOLDENS {
        let tokens = tokenize(expr, &table).unwrap();
        let tree = parse_math(&tokens, true).unwrap_or_else(|e| panic!("{expr}: {e}"));
        let got = mathml(&tree, Display::Inline).to_fragment_string();
        assert_eq!(&got, golden, "expression: {expr}");
    }
}

#[test]
fn display_mode_changes_only_the_display_attribute() {
    let table = CatcodeTable::default();
    let tokens = tokenize("x^2", &table).unwrap();
    let tree = parse_math(&tokens, true).unwrap();
    let inline = mathml(&tree, Display::Inline).to_fragment_string();
    let block = mathml(&tree, Display::Block).to_fragment_string();
    assert_eq!(inline.replace("display=\"inline\"", "display=\"block\""), block);
}
