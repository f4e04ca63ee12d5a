#include "cli_app.hpp"

int main(int argc, char** argv) { return phasewarp::cli::run(argc, argv); }
