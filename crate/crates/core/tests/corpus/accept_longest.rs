// slice: accept
// expect: accept
// rustc: ok
// run: 9
fn larger<'a>(a: &'a i32, b: &'a i32) -> &'a i32 {
    if *a > *b {
        return a;
    }
    return b;
}

fn main() -> i32 {
    let x = 3;
    let y = 9;
    let r = larger(&x, &y);
    return *r;
}
