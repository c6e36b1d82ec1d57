/* Recursive calls exercise the stack discipline: 6! = 720. */
#include "hypercall.h"

static unsigned factorial(unsigned n) {
    if (n < 2) {
        return 1;
    }
    return n * factorial(n - 1);
}

static unsigned twice(unsigned x) {
    return x + x;
}

void _start(void) {
    unsigned f = factorial(6);
    hc_exit((f + twice(3)) & 0xFF);
}
