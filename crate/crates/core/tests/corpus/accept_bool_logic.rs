// slice: accept
// expect: accept
// rustc: ok
// run: 1
fn check(a: bool, b: bool) -> bool {
    return (a && !b) || (!a && b);
}

fn main() -> i32 {
    let mut n = 0;
    if check(true, false) {
        n = n + 1;
    }
    if check(true, true) {
        n = n + 10;
    }
    return n;
}
