// slice: accept
// expect: accept
// rustc: ok
// run: 10
fn bump(c: &mut i32) {
    *c = *c + 2;
}

fn main() -> i32 {
    let mut c = 0;
    let mut i = 0;
    while i < 5 {
        bump(&mut c);
        i = i + 1;
    }
    return c;
}
