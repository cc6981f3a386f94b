// slice: accept
// expect: accept
// rustc: ok
// run: 22
struct Point { x: i32, y: i32 }

fn shift(p: &mut Point, dx: i32) {
    p.x = p.x + dx;
}

fn main() -> i32 {
    let mut p = Point { x: 1, y: 2 };
    shift(&mut p, 10);
    return p.x * p.y;
}
