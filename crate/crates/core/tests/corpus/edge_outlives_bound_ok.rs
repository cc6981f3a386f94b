// slice: edge-invariance
// expect: accept
// rustc: ok
// run: 2
fn pick<'a, 'b: 'a>(x: &'a i32, y: &'b i32) -> &'a i32 {
    return y;
}

fn main() -> i32 {
    let a = 1;
    let b = 2;
    return *pick(&a, &b);
}
