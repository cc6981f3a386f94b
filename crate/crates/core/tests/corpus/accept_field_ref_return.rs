// slice: accept
// expect: accept
// rustc: ok
// run: 9
struct S { x: i32, y: i32 }

fn get_y<'a>(s: &'a S) -> &'a i32 {
    return &s.y;
}

fn main() -> i32 {
    let s = S { x: 1, y: 8 };
    let r = get_y(&s);
    return *r + s.x;
}
