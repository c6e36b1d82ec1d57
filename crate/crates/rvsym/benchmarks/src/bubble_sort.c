/* Bubble sort over N symbolic bytes. Only the element comparisons
 * branch on symbolic data, so exhaustive exploration finds one path
 * per relative ordering: N! in total. Build with -O0 -DN=<size>. */
#include "hypercall.h"

#ifndef N
#define N 4
#endif

static unsigned char data[N];

void _start(void) {
    hc_make_symbolic(data, N);
    for (int i = 0; i < N - 1; i++) {
        for (int j = 0; j < N - 1 - i; j++) {
            if (data[j] > data[j + 1]) {
                unsigned char tmp = data[j];
                data[j] = data[j + 1];
                data[j + 1] = tmp;
            }
        }
    }
    unsigned sum = 0;
    for (int i = 0; i < N; i++) {
        sum += data[i];
    }
    hc_exit(sum & 0xFF);
}
