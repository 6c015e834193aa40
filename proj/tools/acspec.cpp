#include <cstdio>
int main(){ std::puts("acspec"); return 0; }
