// slice: accept
// expect: accept
// rustc: ok
// run: 21
fn swap(a: &mut i32, b: &mut i32) {
    let t = *a;
    *a = *b;
    *b = t;
}

fn main() -> i32 {
    let mut x = 1;
    let mut y = 2;
    swap(&mut x, &mut y);
    return x * 10 + y;
}
