#include "safesim/simulator.hpp"

int main(int argc, char** argv) {
    return safesim::run_cli({argv + 1, argv + argc});
}
