// Placeholder main; replaced by the full CLI once the harness lands.
int main() { return 0; }
