/* Iterative Fibonacci; fib(24) = 46368, exit code 46368 & 0xFF. */
#include "hypercall.h"

void _start(void) {
    unsigned a = 0, b = 1;
    for (int i = 0; i < 24; i++) {
        unsigned next = a + b;
        a = b;
        b = next;
    }
    hc_exit(a & 0xFF);
}
