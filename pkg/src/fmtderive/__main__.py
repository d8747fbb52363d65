from .emit import main

main()
