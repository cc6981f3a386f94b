// slice: edge-invariance
// expect: accept
// rustc: ok
// run: 2
fn store<'a>(dst: &mut &'a i32, src: &'a i32) {
    *dst = src;
}

fn main() -> i32 {
    let x = 1;
    let y = 2;
    let mut r = &x;
    store(&mut r, &y);
    return *r;
}
